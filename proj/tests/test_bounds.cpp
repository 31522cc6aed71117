#include "rks/bounds.hpp"
#include "rks/errors.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

using namespace rks;

// Reference values computed independently at 40 digits (mpmath) from the
// closed forms, for the fixture context below.
namespace oracle {
constexpr double truncation_N_01 = 10.345433722209728;
constexpr double truncation_N_001 = 14.389719018483010;
constexpr double D = 0.8397838885300761;
constexpr double C1 = 2.6101231416874395;
constexpr double d_eps_05 = 18.363551497744143;
constexpr double log_N_05 = 47.708103278438297;
constexpr double c1_n1 = 1.519479328867047e-4;
constexpr double c1_n2 = 4.807727563993390e-5;
constexpr double c2 = 57.359631168297045;
constexpr double log_a = 91.052738857062653;
constexpr double b = 2.412023085087484e-4;
constexpr double min_r_05 = 118809763.94666757;
constexpr double log_failure_4096 = 91.742597756911962;
constexpr double gate_n1 = 2.7265227758924246;
constexpr double gate_n2 = 2.2875509432057292;
constexpr double plane_C1 = 1.7796132648203086;
constexpr double plane_c2 = 3332.0062898210833;
constexpr double plane_min_r_05 = 83348259424.913598;
constexpr double bernstein_50 = 4.445031391939189e-5;
} // namespace oracle

namespace {

BoundContext fixture(int n = 1)
{
    BoundContext c;
    c.n = n;
    c.p = 2.0;
    c.R = 4.0;
    c.delta = 0.2;
    c.C = 1.0;
    c.alpha = n == 1 ? 4.0 : 5.0;
    c.k = std::pow(std::numbers::pi, -0.25);
    c.B_emp = 1.0;
    c.N0 = n == 1 ? 1 : 9;
    c.eta = 1.0 / n;
    return c;
}

constexpr double rel = 1e-12;

} // namespace

TEST_CASE("w_alpha")
{
    CHECK(w_alpha(4.0, 2.0, 1) == 7.0);
    CHECK(w_alpha(4.0, 2.0, 2) == 42.0);
    CHECK_THROWS_AS(w_alpha(4.0, 2.0, 0), ContractError);
    CHECK_THROWS_AS(w_alpha(0.5, 2.0, 1), ContractError);
}

TEST_CASE("context validation")
{
    BoundContext c = fixture();
    CHECK_NOTHROW(c.validate());
    c.delta = 1.0;
    CHECK_THROWS_AS(c.validate(), ContractError);
    c = fixture();
    c.alpha = 0.4;
    CHECK_THROWS_AS(c.validate(), ContractError);
    c = fixture();
    c.N0 = 0;
    CHECK_THROWS_AS(c.validate(), ContractError);
}

TEST_CASE("truncation radius")
{
    const BoundContext c = fixture();
    CHECK(truncation_N(c, 0.1, 1.0) == doctest::Approx(oracle::truncation_N_01).epsilon(rel));
    CHECK(truncation_N(c, 0.01, 1.0) == doctest::Approx(oracle::truncation_N_001).epsilon(rel));
    CHECK(truncation_N(c, 1e300, 1.0) == doctest::Approx(c.R + 2.0).epsilon(1e-12));
    CHECK_THROWS_AS(truncation_N(c, -1.0, 1.0), ContractError);
}

TEST_CASE("truncation radius is monotone in each argument")
{
    const BoundContext base = fixture();
    double prev = std::numeric_limits<double>::infinity();
    for (double eps = 1e-4; eps < 10; eps *= 2) {
        const double N = truncation_N(base, eps, 1.0);
        CHECK(N < prev);
        prev = N;
    }
    auto increasing = [&](auto set) {
        double last = -1.0;
        for (double v = 0.5; v < 20; v *= 1.7) {
            BoundContext c = base;
            set(c, v);
            const double N = truncation_N(c, 0.1, 1.0);
            CHECK(N > last);
            last = N;
        }
    };
    increasing([](BoundContext& c, double v) { c.R = v; });
    increasing([](BoundContext& c, double v) { c.C = v; });
    increasing([](BoundContext& c, double v) { c.B_emp = v; });
    double last = -1.0;
    for (double f = 0.5; f < 20; f *= 1.7) {
        const double N = truncation_N(base, 0.1, f);
        CHECK(N > last);
        last = N;
    }
}

TEST_CASE("sup-norm constant")
{
    const BoundContext c = fixture();
    CHECK(D_constant(c) == doctest::Approx(oracle::D).epsilon(rel));
    CHECK(D_constant(c.k, 0.0, 2.0) == c.k);
    double prev = 0.0;
    for (double d = 0.0; d < 1.0; d += 0.05) {
        const double D = D_constant(c.k, d, 2.0);
        CHECK(D > prev);
        prev = D;
    }
    CHECK(D_constant(c.k, 1.0 - 1e-15, 2.0) > 1e7);
    CHECK_THROWS_AS(D_constant(c.k, 1.0, 2.0), ContractError);
}

TEST_CASE("covering dimension and count")
{
    const BoundContext c = fixture();
    CHECK(C1_constant(c) == doctest::Approx(oracle::C1).epsilon(rel));
    CHECK(covering_dimension(c, 0.5) == doctest::Approx(oracle::d_eps_05).epsilon(rel));
    CHECK(covering_dimension(c, 1e300) == doctest::Approx(2.0 * 1 * 6.0).epsilon(rel));

    const CoveringCount n = covering_count(c, 0.5);
    CHECK(n.log_value == doctest::Approx(oracle::log_N_05).epsilon(rel));
    REQUIRE(n.value);
    CHECK(*n.value == doctest::Approx(std::exp(oracle::log_N_05)).epsilon(1e-10));
    CHECK_THROWS_AS(covering_count(c, 8.0 * D_constant(c)), ContractError);

    double prev_d = 0.0;
    double prev_log = -1.0;
    for (double eps = 4.0; eps > 1e-4; eps /= 2) {
        const double d = covering_dimension(c, eps * 1.7);
        CHECK(d > prev_d);
        prev_d = d;
        const double l = covering_count(c, eps).log_value;
        CHECK(l > prev_log);
        prev_log = l;
    }

    for (auto set : {+[](BoundContext& x, double v) { x.R = v; }, +[](BoundContext& x, double v) { x.C = v; },
                     +[](BoundContext& x, double v) { x.delta = v / 40; }}) {
        double last = -1.0;
        for (double v = 1.0; v < 30; v *= 1.6) {
            BoundContext x = c;
            set(x, v);
            const double d = covering_dimension(x, 0.5);
            CHECK(d > last);
            last = d;
        }
    }
}

TEST_CASE("covering count overflows into the log domain only")
{
    BoundContext c = fixture();
    c.R = 4096;
    const CoveringCount n = covering_count(c, 1e-3);
    CHECK(std::isfinite(n.log_value));
    CHECK_FALSE(n.value);
}

TEST_CASE("Bernstein tail")
{
    CHECK(bernstein_tail(50.0, 100, 1.0, 1.0) == doctest::Approx(oracle::bernstein_50).epsilon(rel));
    CHECK(bernstein_tail(0.0, 10, 1.0, 1.0) == 2.0);
    CHECK(bernstein_probability(0.0, 10, 1.0, 1.0) == 1.0);
    double prev = 2.0;
    for (double l = 0.1; l < 100; l *= 1.5) {
        const double t = bernstein_tail(l, 10, 0.5, 2.0);
        CHECK(t < prev);
        prev = t;
    }
    CHECK_THROWS_AS(bernstein_tail(-1.0, 10, 1.0, 1.0), ContractError);
    CHECK_THROWS_AS(bernstein_tail(1.0, 0, 1.0, 1.0), ContractError);
}

TEST_CASE("chaining constants")
{
    const BoundContext c = fixture();
    const ChainingConstants cc = chaining_constants(c);
    CHECK(cc.c1 == doctest::Approx(oracle::c1_n1).epsilon(rel));
    CHECK(chaining_constants(fixture(2)).c1 == doctest::Approx(oracle::c1_n2).epsilon(rel));
    CHECK(cc.c2 == doctest::Approx(oracle::c2).epsilon(rel));
    CHECK(cc.log_a == doctest::Approx(oracle::log_a).epsilon(rel));
    CHECK(cc.b == doctest::Approx(oracle::b).epsilon(rel));
    CHECK(cc.D >= c.k);
    CHECK(cc.b <= 3.0 / (4.0 * c.k));
    CHECK(cc.log_a >= std::log(2.0) + covering_count(c, 1.0 / (2.0 * cc.D)).log_value);

    const BoundContext p = fixture(2);
    const ChainingConstants pc = chaining_constants(p);
    CHECK(pc.C1 == doctest::Approx(oracle::plane_C1).epsilon(rel));
    CHECK(pc.c2 == doctest::Approx(oracle::plane_c2).epsilon(rel));
}

TEST_CASE("gate threshold")
{
    CHECK(gate_threshold(1) == doctest::Approx(oracle::gate_n1).epsilon(rel));
    CHECK(gate_threshold(2) == doctest::Approx(oracle::gate_n2).epsilon(rel));
}

TEST_CASE("success probability")
{
    const BoundContext c = fixture();
    const SuccessBound s = success_probability(c, 4096, 0.5);
    CHECK(s.log_failure == doctest::Approx(oracle::log_failure_4096).epsilon(rel));
    CHECK(s.vacuous);
    CHECK(s.clamped == 0.0);
    CHECK(s.raw < 0.0);

    const SuccessBound big = success_probability(c, 1'000'000'000'000LL, 0.5);
    CHECK_FALSE(big.vacuous);
    CHECK(big.clamped == 1.0);

    double prev = -std::numeric_limits<double>::infinity();
    for (long long r = 1; r < 10'000'000'000'000LL; r *= 3) {
        const SuccessBound b = success_probability(c, r, 0.5);
        CHECK(b.raw >= prev);
        CHECK(b.clamped >= 0.0);
        CHECK(b.clamped <= 1.0);
        prev = b.raw;
    }
    CHECK_THROWS_AS(success_probability(c, 100, 0.8), ContractError);
    CHECK_THROWS_AS(success_probability(c, 100, 0.0), ContractError);
    CHECK_THROWS_AS(success_probability(c, 0, 0.5), ContractError);
}

TEST_CASE("minimal sample size")
{
    const BoundContext c = fixture();
    CHECK(min_sample_size(c, 0.5) == doctest::Approx(oracle::min_r_05).epsilon(rel));
    CHECK(min_sample_size(fixture(2), 0.5) == doctest::Approx(oracle::plane_min_r_05).epsilon(rel));

    double prev = std::numeric_limits<double>::infinity();
    for (double mu = 0.05; mu < 0.8; mu += 0.05) {
        const double r = min_sample_size(c, mu);
        CHECK(r < prev);
        prev = r;
    }
    double last = 0.0;
    for (double R = 1.0; R < 200; R *= 1.5) {
        BoundContext x = c;
        x.R = R;
        const double r = min_sample_size(x, 0.5);
        CHECK(r > last);
        last = r;
    }
}

TEST_CASE("gate holds exactly from the minimal sample size on")
{
    for (int n : {1, 2})
        for (double mu : {0.1, 0.5, 0.75}) {
            const BoundContext c = fixture(n);
            const double m = min_sample_size(c, mu);
            CHECK(success_probability(c, static_cast<long long>(std::ceil(m)), mu).gate);
            CHECK_FALSE(success_probability(c, static_cast<long long>(std::floor(m)) - 1, mu).gate);
        }
}

TEST_CASE("doubling k scales the raw sample size by 2^{p-1}")
{
    for (double p : {1.5, 2.0, 3.0}) {
        const double a = min_sample_size(p, 0.8, 4.0, 1, 0.5, 1e-4, 50.0);
        const double b = min_sample_size(p, 1.6, 4.0, 1, 0.5, 1e-4, 50.0);
        CHECK(b / a == doctest::Approx(std::pow(2.0, p - 1.0)).epsilon(1e-13));
    }
}

TEST_CASE("sample size grows like R^{2n}")
{
    for (int n : {1, 2})
        for (double R : {32.0, 64.0}) {
            BoundContext c = fixture(n);
            c.R = R;
            const double lo = min_sample_size(c, 0.5);
            c.R = 2 * R;
            const double ratio = min_sample_size(c, 0.5) / lo;
            const double target = std::pow(2.0, 2 * n);
            CHECK(std::abs(ratio - target) <= 0.2 * target);
        }
}

TEST_CASE("closed forms are pure")
{
    const BoundContext c = fixture(2);
    const ChainingConstants a = chaining_constants(c);
    const ChainingConstants b = chaining_constants(c);
    CHECK(a.log_a == b.log_a);
    CHECK(a.c2 == b.c2);
    CHECK(min_sample_size(c, 0.3) == min_sample_size(c, 0.3));
}
