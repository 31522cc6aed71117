#include "rks/errors.hpp"
#include "rks/numerics.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <numeric>

using namespace rks;

// Reference values below were computed independently at 30 digits (mpmath).
namespace oracle {
constexpr double gauss_6 = 1.772453850905516;            // \int_{-6}^{6} e^{-x^2}
constexpr double gauss_norm_6 = 1.3313353638003897;      // ||e^{-x^2/2}||_{L^2[-6,6]}
constexpr double gauss_plane_3 = 3.1414538564366894;     // \int_{[-3,3]^2} e^{-|x|^2}
constexpr double kinked = 1.1929265427345638;            // \int_{-5}^{5} e^{-|x|} cos^2 x
} // namespace oracle

TEST_CASE("weights sum to the box volume")
{
    for (int dim : {1, 2}) {
        const QuadratureGrid g = QuadratureGrid::covering(dim, {0.3, -0.2}, {1.7, 0.9});
        double sum = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i)
            sum += g.weight(i);
        CHECK(sum == doctest::Approx(g.volume()).epsilon(1e-12));
        CHECK(g.size() == static_cast<std::size_t>(std::pow(g.nodes_per_axis(), dim)));
    }
}

TEST_CASE("grid invariants are enforced")
{
    CHECK_THROWS_AS(QuadratureGrid(3, {0, 0}, {1, 1}, 2), ContractError);
    CHECK_THROWS_AS(QuadratureGrid(1, {0, 0}, {0, 1}, 2), ContractError);
    CHECK_THROWS_AS(QuadratureGrid(1, {0, 0}, {1, 1}, 1, 1), ContractError);
}

TEST_CASE("integrate_box exact cases")
{
    const QuadratureGrid g(1, {0, 0}, {1, 0}, 4);
    CHECK(integrate_box([](const Point&) { return 1.0; }, g) == 2.0);
    CHECK(std::abs(integrate_box([](const Point& x) { return x[0]; }, g)) < 1e-14);
}

TEST_CASE("Gaussian integral on [-6, 6] with 64 nodes")
{
    const QuadratureGrid g(1, {0, 0}, {6, 0}, 8, 8);
    REQUIRE(g.size() == 64);
    const ScalarField f = [](const Point& x) { return std::exp(-x[0] * x[0]); };
    CHECK(std::abs(integrate_box(f, g) - oracle::gauss_6) < 1e-10);
    CHECK(std::abs(integrate_box(f, g.refined()) - integrate_box(f, g)) < 1e-10);
}

TEST_CASE("tensor rule in the plane")
{
    const QuadratureGrid g = QuadratureGrid::cube(2, 3.0);
    const ScalarField f = [](const Point& x) { return std::exp(-x[0] * x[0] - x[1] * x[1]); };
    CHECK(integrate_box(f, g) == doctest::Approx(oracle::gauss_plane_3).epsilon(1e-12));
}

TEST_CASE("composite rule converges on a kinked integrand")
{
    const QuadratureGrid g(1, {0, 0}, {5, 0}, 40);
    const ScalarField f = [](const Point& x) { return std::exp(-std::abs(x[0])) * std::cos(x[0]) * std::cos(x[0]); };
    CHECK(integrate_box(f, g) == doctest::Approx(oracle::kinked).epsilon(1e-12));
}

TEST_CASE("non-finite integrand names the node")
{
    const QuadratureGrid g(1, {0, 0}, {1, 0}, 2);
    const ScalarField f = [](const Point& x) {
        return x[0] > 0.5 ? std::numeric_limits<double>::quiet_NaN() : 1.0;
    };
    try {
        integrate_box(f, g);
        FAIL("expected EvaluationError");
    } catch (const EvaluationError& e) {
        CHECK(std::string(e.what()).find("node") != std::string::npos);
    }
}

TEST_CASE("lp_norm_box scaling")
{
    const QuadratureGrid unit = QuadratureGrid::cube(1, 0.5);
    CHECK(lp_norm_box([](const Point&) { return 1.0; }, 2.0, unit) == doctest::Approx(1.0).epsilon(1e-14));

    const QuadratureGrid box(2, {0, 0}, {1.5, 0.5}, 3);
    const double V = box.volume();
    for (double p : {1.0, 1.5, 2.0, 3.0}) {
        const double c = 2.5;
        CHECK(lp_norm_box([c](const Point&) { return c; }, p, box) ==
              doctest::Approx(c * std::pow(V, 1.0 / p)).epsilon(1e-12));
    }
}

TEST_CASE("lp norm of a Gaussian matches the reference")
{
    const QuadratureGrid g = QuadratureGrid::cube(1, 6.0);
    const ScalarField f = [](const Point& x) { return std::exp(-x[0] * x[0] / 2); };
    CHECK(std::abs(lp_norm_box(f, 2.0, g) - oracle::gauss_norm_6) < 1e-8);
}

TEST_CASE("lp norm is absolutely homogeneous")
{
    const QuadratureGrid g = QuadratureGrid::cube(2, 2.0);
    const ScalarField f = [](const Point& x) { return std::sin(x[0]) + x[1] * x[1]; };
    for (double c : {-3.0, 0.25, 7.0}) {
        const ScalarField cf = [&](const Point& x) { return c * f(x); };
        CHECK(lp_norm_box(cf, 1.7, g) == doctest::Approx(std::abs(c) * lp_norm_box(f, 1.7, g)).epsilon(1e-12));
    }
}

TEST_CASE("lp norm survives tiny magnitudes")
{
    const QuadratureGrid g = QuadratureGrid::cube(1, 0.5);
    const ScalarField f = [](const Point&) { return 1e-200; };
    CHECK(lp_norm_box(f, 2.0, g) == doctest::Approx(1e-200).epsilon(1e-12));
}

TEST_CASE("tail bound of a power envelope")
{
    // (1/|x|^4)^2 integrated over |x| > T is (2/7) T^-7.
    const PowerEnvelope env{1.0, 0.0, 4.0, {0, 0}};
    for (double T : {1.0, 3.0, 10.0})
        CHECK(tail_mass_bound(env, 2.0, 1, T) == doctest::Approx(2.0 / 7.0 * std::pow(T, -7.0)).epsilon(1e-12));
}

TEST_CASE("tail bound is zero for support inside the box")
{
    CHECK(tail_mass_bound(CompactSupport{2.0}, 2.0, 1, 3.0) == 0.0);
    CHECK(tail_mass_bound(CompactSupport{2.0}, 2.0, 2, 2.0) == 0.0);
    CHECK_THROWS_AS(tail_mass_bound(CompactSupport{4.0}, 2.0, 1, 3.0), ContractError);
}

TEST_CASE("tail bound decreases with the box")
{
    const PowerEnvelope env{2.0, 1.0, 5.0, {0.3, -0.4}};
    for (int dim : {1, 2}) {
        double prev = std::numeric_limits<double>::infinity();
        for (double T = 2.0; T < 40.0; T *= 1.5) {
            const double t = tail_mass_bound(env, 2.0, dim, T);
            CHECK(t > 0.0);
            CHECK(t < prev);
            prev = t;
        }
    }
}

TEST_CASE("global norm requires a decay model")
{
    const ScalarField f = [](const Point& x) { return std::exp(-x[0] * x[0]); };
    CHECK_THROWS_AS(lp_norm_global(f, 2.0, 1, 5.0, std::nullopt), ContractError);
}

TEST_CASE("global norm with a compact support has no tail")
{
    const ScalarField f = [](const Point& x) { return std::abs(x[0]) < 1.0 ? 1.0 - std::abs(x[0]) : 0.0; };
    const GlobalNorm n = lp_norm_global(f, 2.0, 1, 2.0, DecayModel{CompactSupport{1.0}});
    CHECK(n.tail_bound == 0.0);
    CHECK(n.value == doctest::Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-12));
}

TEST_CASE("choose_truncation meets the tolerance")
{
    const PowerEnvelope env{1.0, 1.0, 4.0, {0, 0}};
    const double T = choose_truncation(env, 2.0, 1, 2.0, 1.0, 1e-3);
    CHECK(tail_mass_bound(env, 2.0, 1, T) <= 1e-3);
    CHECK(tail_mass_bound(env, 2.0, 1, T - 1.0) > 1e-3);
}

TEST_CASE("dense cube points")
{
    const auto pts = dense_cube_points(2, 4.0, 5);
    REQUIRE(pts.size() == 25);
    CHECK(pts.front()[0] == -2.0);
    CHECK(pts.back()[1] == 2.0);
    CHECK_THROWS_AS(dense_cube_points(1, 4.0, 1), ContractError);
}

TEST_CASE("norm helpers")
{
    CHECK(l1_norm({3.0, -4.0}, 2) == 7.0);
    CHECK(l1_norm({3.0, -4.0}, 1) == 3.0);
    CHECK(linf_norm({3.0, -4.0}, 2) == 4.0);
}
