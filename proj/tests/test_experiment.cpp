#include "rks/errors.hpp"
#include "rks/experiment.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <string>

using namespace rks;

namespace {

ExperimentConfig small_config()
{
    ExperimentConfig c;
    c.lattice.half_width = 20.0;
    c.frame_trials = 20;
    c.trials = 12;
    c.r = 64;
    c.seed = 4242;
    return c;
}

const ExperimentSetup& small_setup()
{
    static const ExperimentSetup s = prepare(small_config());
    return s;
}

} // namespace

TEST_CASE("config validation names the field")
{
    ExperimentConfig c = small_config();
    c.mu = 0.85;
    try {
        c.validate();
        FAIL("expected ContractError");
    } catch (const ContractError& e) {
        CHECK(std::string(e.what()).rfind("experiment.mu", 0) == 0);
    }
    c = small_config();
    c.delta = 1.0;
    CHECK_THROWS_AS(c.validate(), ContractError);
    c = small_config();
    c.trials = 0;
    CHECK_THROWS_AS(c.validate(), ContractError);
}

TEST_CASE("uniform samples")
{
    const auto a = draw_samples(2, 4.0, 1000, 9, 3);
    const auto b = draw_samples(2, 4.0, 1000, 9, 3);
    CHECK(a == b);
    CHECK(a != draw_samples(2, 4.0, 1000, 9, 4));
    for (const Point& x : a) {
        CHECK(std::abs(x[0]) <= 2.0);
        CHECK(std::abs(x[1]) <= 2.0);
    }
    for (int dim : {1, 2}) {
        const int m = 100000;
        const auto pts = draw_samples(dim, 4.0, m, 17);
        const double sigma = 4.0 / std::sqrt(12.0) / std::sqrt(static_cast<double>(m));
        for (int a = 0; a < dim; ++a) {
            double mean = 0.0;
            for (const Point& x : pts)
                mean += x[a];
            mean /= m;
            CHECK(std::abs(mean) < 3 * sigma);
        }
        if (dim == 1)
            for (const Point& x : pts)
                if (x[1] != 0.0) {
                    FAIL("second coordinate must be zero in 1D");
                    break;
                }
    }
}

TEST_CASE("Z statistic")
{
    const ZStatistic zero([](const Point&) { return 0.0; }, 1, 2.0, 4.0);
    CHECK(zero({0.3, 0}) == 0.0);

    const ZStatistic flat([](const Point& x) { return x[0] > 0 ? 1.5 : -1.5; }, 1, 2.0, 4.0);
    for (double x : {-1.9, -0.2, 0.7, 1.99})
        CHECK(std::abs(flat({x, 0})) < 1e-12);

    const SynthFunction f = sample_random_member(small_setup().kernel, small_setup().lattice, 4.0, 0.2, 3).function;
    const ZStatistic z(f, 4.0);
    const auto pts = draw_samples(1, 4.0, 200000, 5);
    double s = 0.0, s2 = 0.0;
    for (const Point& x : pts) {
        const double v = z(x);
        s += v;
        s2 += v * v;
    }
    const double m = static_cast<double>(pts.size());
    const double mean = s / m;
    const double sd = std::sqrt(s2 / m - mean * mean);
    CHECK(std::abs(mean) < 4 * sd / std::sqrt(m));
    CHECK(z_statistic(f, {0.4, 0}, 4.0) == doctest::Approx(z({0.4, 0})).epsilon(1e-12));
}

TEST_CASE("Wilson interval")
{
    // Reference values computed independently (mpmath).
    const Interval a = wilson_interval(5, 100);
    CHECK(a.lo == doctest::Approx(0.02154367915436797).epsilon(1e-12));
    CHECK(a.hi == doctest::Approx(0.11175046923191914).epsilon(1e-12));
    const Interval z = wilson_interval(0, 500);
    CHECK(z.lo == 0.0);
    CHECK(z.hi == doctest::Approx(0.00762434046155224).epsilon(1e-12));
    const Interval o = wilson_interval(500, 500);
    CHECK(o.hi == 1.0);
    CHECK(o.lo == doctest::Approx(0.9923756595384478).epsilon(1e-12));
    CHECK_THROWS_AS(wilson_interval(3, 2), ContractError);
}

TEST_CASE("moment bounds")
{
    const ExperimentSetup& s = small_setup();
    const SynthFunction f = sample_random_member(s.kernel, s.lattice, 4.0, 0.2, 10).function;
    const SynthFunction g = sample_random_member(s.kernel, s.lattice, 4.0, 0.2, 11).function;

    const MomentReport same = moment_bounds_check(f, f, s.ctx, 2000, 1);
    CHECK(same.estimate[2] == 0.0);
    CHECK(same.estimate[3] == 0.0);
    CHECK(same.bound[2] == 0.0);
    CHECK(same.bound[3] == 0.0);
    CHECK(same.ok());

    const MomentReport r = moment_bounds_check(f, g, s.ctx, 10000, 2);
    CHECK(r.ok());
    CHECK(r.bound[0] == doctest::Approx(s.ctx.k * s.ctx.k / 4.0).epsilon(1e-14));
    CHECK(r.bound[1] == doctest::Approx(s.ctx.k * s.ctx.k).epsilon(1e-14));
    CHECK(r.sup_distance > 0.0);

    // With the cube average dominated, the sup of |Z| is the grid max of |f|^p
    // minus it; the estimate also sees the draws, so a fine grid caps it.
    const double sup = linf_norm_CR(f, 4.0);
    const double fine = linf_norm_CR(f, 4.0, 16385);
    const double avg = ZStatistic(f, 4.0).cube_average();
    REQUIRE(sup * sup - avg > avg);
    CHECK(same.estimate[1] >= sup * sup - avg - 1e-12);
    CHECK(same.estimate[1] <= fine * fine - avg + 1e-9);
}

TEST_CASE("a single sample unrolls by hand")
{
    const ExperimentSetup& s = small_setup();
    const SynthFunction f = sample_random_member(s.kernel, s.lattice, 4.0, 0.2, 1).function;
    const std::vector<Point> one{Point{0.37, 0}};
    const TrialRow row = evaluate_trial(f, one, 4.0, 0.2, 0.5);
    const double v = f(one[0]);
    CHECK(row.S == v * v);
    CHECK(row.lower == doctest::Approx(0.3 / 4.0).epsilon(1e-15));
    CHECK(row.upper == doctest::Approx(1.5 / 4.0).epsilon(1e-15));
    CHECK(row.success == (row.lower <= row.S && row.S <= row.upper));
}

TEST_CASE("trials replay deterministically")
{
    const ExperimentSetup& s = small_setup();
    const auto a = sampling_trial(s, 64, 0.5, 7);
    const auto b = sampling_trial(s, 64, 0.5, 7);
    REQUIRE(a.size() == 1);
    CHECK(a[0].S == b[0].S);
    CHECK(a[0].func_seed == b[0].func_seed);
    CHECK(a[0].success == (a[0].lower <= a[0].S && a[0].S <= a[0].upper));
    CHECK(sampling_trial(s, 64, 0.5, 8)[0].func_seed != a[0].func_seed);
}

TEST_CASE("failure rate experiment")
{
    ExperimentSetup s = small_setup();
    const TrialReport one = failure_rate_experiment(s, 64, 0.5);
    CHECK(one.rows.size() == 12);
    CHECK(one.failure_rate >= 0.0);
    CHECK(one.failure_rate <= 1.0);
    CHECK(one.wilson.lo <= one.failure_rate);
    CHECK(one.wilson.hi >= one.failure_rate);

    s.config.threads = 4;
    const TrialReport four = failure_rate_experiment(s, 64, 0.5);
    CHECK(trial_csv(one, "x") == trial_csv(four, "x"));

    s.config.trials = 1;
    const TrialReport single = failure_rate_experiment(s, 16, 0.5);
    CHECK((single.failure_rate == 0.0 || single.failure_rate == 1.0));

    s.config.trials = 20;
    s.config.functions_per_trial = 2;
    const TrialReport easy = failure_rate_experiment(s, 20000, 0.79);
    CHECK(easy.rows.size() == 40);
    CHECK(easy.failures == 0);
}

TEST_CASE("CSV layout")
{
    const TrialReport rep = failure_rate_experiment(small_setup(), 32, 0.5);
    const std::string csv = trial_csv(rep, "abc");
    CHECK(csv.rfind("# config_digest: abc\ntrial,func_seed,S,lower,upper,success\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 2 + static_cast<long>(rep.rows.size()));
    CHECK(csv.find('\r') == std::string::npos);

    std::vector<TrialReport> reps{rep, failure_rate_experiment(small_setup(), 64, 0.5)};
    const std::string sweep = sweep_csv(reps, "abc");
    CHECK(std::count(sweep.begin(), sweep.end(), '\n') == 4);
}

TEST_CASE("format_double round trips")
{
    for (double v : {0.1, 1.0 / 3.0, 1e-300, 12345.678, -2.5})
        CHECK(std::stod(format_double(v)) == v);
}

TEST_CASE("truncation experiment")
{
    ExperimentSetup s = small_setup();
    s.config.truncation_members = 3;
    const TruncationReport loose = truncation_experiment(s, 1e6);
    CHECK(loose.N > 6.0);
    CHECK(loose.N < 6.5);
    CHECK(loose.all_below);
    CHECK(loose.monotone);
    CHECK(loose.errors.size() == 3);

    const TruncationReport tight = truncation_experiment(s, 0.5);
    CHECK(tight.all_below);
    CHECK(tight.monotone);

    s.config.lattice.half_width = 4.0;
    s.lattice = Lattice::uniform(1, 1.0, 4.0);
    CHECK_THROWS_AS(truncation_experiment(s, 0.01), InfeasibleError);
}

TEST_CASE("Bernstein experiment")
{
    const ExperimentSetup& s = small_setup();
    const SynthFunction f = sample_random_member(s.kernel, s.lattice, 4.0, 0.2, 2).function;
    const BernsteinReport b = bernstein_experiment(s, f, 100, 2000, 6);
    CHECK(b.lambda.size() == 10);
    CHECK(b.dominated);
    for (std::size_t i = 0; i < b.lambda.size(); ++i) {
        CHECK(b.frequency[i] <= b.bound[i] + b.half_width[i]);
        if (i > 0)
            CHECK(b.frequency[i] <= b.frequency[i - 1]);
    }
}

TEST_CASE("reproducing identity on members")
{
    const ExperimentSetup& s = small_setup();
    for (std::uint64_t seed : {1, 2, 3}) {
        const SynthFunction f = sample_random_member(s.kernel, s.lattice, 4.0, 0.2, seed).function;
        CHECK(reproducing_defect(f, 4.0) < 1e-6);
    }
}

TEST_CASE("diagnostics pass on the default kernel")
{
    ExperimentConfig c = small_config();
    c.diagnostic_members = 5;
    c.moment_pairs = 3;
    c.moment_draws = 2000;
    const auto diags = run_diagnostics(prepare(c));
    CHECK(diags.size() >= 8);
    for (const Diagnostic& d : diags) {
        INFO(d.name << ": " << d.detail);
        CHECK(d.passed);
    }
}
