#pragma once

// Monte Carlo checks of the random sampling inequality: uniform samples on
// C_R, the centred statistics Z_j, their moment bounds, per-trial success of
//   (r/R^n)(1 - mu - delta) <= sum_j |f(x_j)|^p <= (r/R^n)(1 + mu)
// and aggregate failure rates against the theoretical bound.

#include "rks/bounds.hpp"
#include "rks/kernels.hpp"
#include "rks/rkspace.hpp"

#include <json.hpp>

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace rks {

struct LatticeParams {
    std::optional<double> gap; // 1/n when absent
    double half_width = 72.0;
};

struct ExperimentConfig {
    KernelParams kernel{};
    LatticeParams lattice{};
    double R = 4.0;
    double delta = 0.2;
    double mu = 0.5;
    int r = 256;
    int trials = 200;
    int functions_per_trial = 1;
    std::uint64_t seed = 1;

    int frame_trials = 200;   // coefficient vectors behind B_emp
    double frame_safety = 2.0;

    std::vector<int> sweep_r;     // sample mode: one aggregate row per r
    std::vector<double> sweep_mu; // or per mu (not both)

    std::vector<double> truncation_eps{0.1, 0.01};
    int truncation_members = 20;
    int truncation_steps = 4; // extra N + j*eta checks for monotonicity

    int diagnostic_members = 50; // reproducing identity and sup-norm checks
    int moment_pairs = 50;
    int moment_draws = 10000;
    int bernstein_trials = 10000;
    int bernstein_r = 100;

    SpaceSettings space{};
    unsigned threads = 1;

    double gap() const { return lattice.gap.value_or(1.0 / kernel.dim); }
    // Throws ContractError naming the offending field.
    void validate() const;
};

// Everything derived once from a config: kernel, lattice and the bound context.
struct ExperimentSetup {
    ExperimentConfig config;
    KernelSpec kernel;
    Lattice lattice;
    KernelConstants kc;
    double B_emp = 0.0;
    BoundContext ctx;
};

ExperimentSetup prepare(const ExperimentConfig& config);

// r points i.i.d. uniform on [-R/2, R/2]^n from the substream (seed, stream).
std::vector<Point> draw_samples(int dim, double R, int r, std::uint64_t seed, std::uint64_t stream = 0);

// Z(x) = |f(x)|^p - R^{-n} \int_{C_R} |f|^p, with the cube average computed once.
class ZStatistic {
public:
    // f must be normalized.
    ZStatistic(const SynthFunction& f, double R);
    // Arbitrary field, for stubs and controls.
    ZStatistic(ScalarField f, int dim, double p, double R, const QuadratureSettings& quad = {});

    double operator()(const Point& x) const;
    double cube_average() const noexcept { return average_; }

private:
    ScalarField f_;
    double p_;
    double average_;
};

double z_statistic(const SynthFunction& f, const Point& x, double R);

struct Interval {
    double lo = 0.0;
    double hi = 1.0;
    double half_width() const noexcept { return (hi - lo) / 2.0; }
};

// Wilson score interval at 95%.
Interval wilson_interval(long long hits, long long n);

struct MomentReport {
    // Index 0..3 correspond to the variance, sup, difference-variance and
    // difference-sup inequalities.
    std::array<double, 4> estimate{};
    std::array<double, 4> bound{};
    std::array<double, 4> margin{};
    double sup_distance = 0.0; // ||f - g||_{L^inf(C_R)}
    bool ok() const noexcept;
};

// f and g must be normalized members of V(R, delta).
MomentReport moment_bounds_check(const SynthFunction& f, const SynthFunction& g, const BoundContext& ctx,
                                 int sample_count, std::uint64_t seed);

struct TrialRow {
    int trial = 0;
    std::uint64_t func_seed = 0;
    double S = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    bool success = false;
};

// One trial: fresh members, one shared sample set, one row per member.
std::vector<TrialRow> sampling_trial(const ExperimentSetup& setup, int r, double mu, int trial_index);
// Same inequality for a given member and sample set.
TrialRow evaluate_trial(const SynthFunction& f, std::span<const Point> samples, double R, double delta,
                        double mu);

struct TrialReport {
    int r = 0;
    double mu = 0.0;
    int trials = 0;
    int failures = 0; // trials where some member violated the inequality
    double failure_rate = 0.0;
    Interval wilson{};
    double A_emp = 0.0; // min S R^n / r
    double B_emp_samples = 0.0;
    long long rejections = 0;
    SuccessBound bound{};
    std::vector<TrialRow> rows;
};

TrialReport failure_rate_experiment(const ExperimentSetup& setup, int r, double mu);
TrialReport failure_rate_experiment(const ExperimentSetup& setup);

struct TruncationReport {
    double eps = 0.0;
    double N = 0.0;
    std::vector<double> errors;              // ||f - f_N||_{L^p(C_R)} per member
    std::vector<std::vector<double>> sweep;  // errors at N + j eta, j = 0..steps
    double max_ratio = 0.0;                  // max error / eps
    bool all_below = false;
    bool monotone = false;
};

// Throws InfeasibleError naming the required half-width when the lattice
// does not reach past N/2.
TruncationReport truncation_experiment(const ExperimentSetup& setup, double eps);

struct BernsteinReport {
    int r = 0;
    int trials = 0;
    double sigma_sq = 0.0;
    double M = 0.0;
    std::vector<double> lambda;
    std::vector<double> frequency;
    std::vector<double> bound;       // clamped to 1
    std::vector<double> half_width;  // Wilson
    bool dominated = false;
};

BernsteinReport bernstein_experiment(const ExperimentSetup& setup, const SynthFunction& f, int r, int trials,
                                     std::uint64_t seed);

// ||Tf - f||_{L^p(C_R)} / ||f||_{L^p(C_R)} with T applied by quadrature.
double reproducing_defect(const SynthFunction& f, double R);

struct Diagnostic {
    std::string name;
    bool passed = false;
    double value = 0.0;
    double threshold = 0.0;
    std::string detail;
};

std::vector<Diagnostic> run_diagnostics(const ExperimentSetup& setup);

nlohmann::json to_json(const TrialReport& report, bool include_rows = false);
nlohmann::json to_json(const TruncationReport& report);
nlohmann::json to_json(const BernsteinReport& report);
nlohmann::json to_json(const SuccessBound& bound);

// Fixed-format CSV: header comment with the digest, then
// trial,func_seed,S,lower,upper,success.
std::string trial_csv(const TrialReport& report, const std::string& digest);
std::string sweep_csv(std::span<const TrialReport> reports, const std::string& digest);

// Shortest round-trip decimal form.
std::string format_double(double v);

} // namespace rks
