#include "rks/experiment.hpp"

#include "rks/errors.hpp"
#include "rks/parallel.hpp"
#include "rks/random.hpp"

#include <algorithm>
#include <charconv>
#include <limits>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

namespace rks {

namespace {

constexpr double kWilsonZ = 1.959963984540054;

void require(bool ok, const std::string& what)
{
    if (!ok)
        throw ContractError(what);
}

unsigned worker_count(unsigned requested)
{
    if (requested > 0)
        return requested;
    return std::max(1u, std::thread::hardware_concurrency());
}

double sample_variance(std::span<const double> v)
{
    if (v.size() < 2)
        return 0.0;
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v)
        ss += (x - mean) * (x - mean);
    return ss / static_cast<double>(v.size() - 1);
}

std::uint64_t stream_key(std::uint64_t seed, std::initializer_list<std::uint64_t> ids)
{
    return CounterRng::substream(seed, ids).key();
}

} // namespace

void ExperimentConfig::validate() const
{
    const int n = kernel.dim;
    require(n == 1 || n == 2, "kernel.dim: must be 1 or 2");
    require(R > 0.0 && std::isfinite(R), "experiment.R: must be positive");
    require(delta > 0.0 && delta < 1.0, "experiment.delta: must lie in (0, 1)");
    require(mu > 0.0 && mu < 1.0 - delta, "experiment.mu: must lie in (0, 1 - delta)");
    require(r >= 1, "experiment.r: must be at least 1");
    require(trials >= 1, "experiment.trials: must be at least 1");
    require(functions_per_trial >= 1, "experiment.functions_per_trial: must be at least 1");
    require(frame_trials >= 1, "experiment.frame_trials: must be at least 1");
    require(frame_safety >= 1.0, "experiment.frame_safety: must be at least 1");
    require(gap() > 0.0 && gap() < 2.0 / n, "lattice.gap: must lie in (0, 2/n)");
    require(lattice.half_width > 0.0, "lattice.half_width: must be positive");
    require(sweep_r.empty() || sweep_mu.empty(), "experiment: sweep_r and sweep_mu are exclusive");
    for (int v : sweep_r)
        require(v >= 1, "experiment.sweep_r: entries must be at least 1");
    for (double v : sweep_mu)
        require(v > 0.0 && v < 1.0 - delta, "experiment.sweep_mu: entries must lie in (0, 1 - delta)");
    for (double e : truncation_eps)
        require(e > 0.0, "experiment.truncation_eps: entries must be positive");
    require(truncation_members >= 1, "experiment.truncation_members: must be at least 1");
    require(truncation_steps >= 0, "experiment.truncation_steps: must be non-negative");
    require(diagnostic_members >= 1, "experiment.diagnostic_members: must be at least 1");
    require(moment_pairs >= 1, "experiment.moment_pairs: must be at least 1");
    require(moment_draws >= 2, "experiment.moment_draws: must be at least 2");
    require(bernstein_trials >= 1, "experiment.bernstein_trials: must be at least 1");
    require(bernstein_r >= 1, "experiment.bernstein_r: must be at least 1");
}

ExperimentSetup prepare(const ExperimentConfig& config)
{
    config.validate();
    KernelSpec kernel = make_kernel(config.kernel);
    Lattice lattice = Lattice::uniform(config.kernel.dim, config.gap(), config.lattice.half_width);
    const KernelConstants kc = k_sup(kernel, config.R, config.space.op);
    const double B = empirical_frame_bound(kernel, lattice, config.frame_trials, stream_key(config.seed, {0xb0ULL}),
                                           config.frame_safety, config.space);
    BoundContext ctx;
    ctx.n = kernel.dim();
    ctx.p = kernel.p();
    ctx.R = config.R;
    ctx.delta = config.delta;
    ctx.C = kernel.decay_amplitude();
    ctx.alpha = kernel.decay_rate();
    ctx.k = kc.k;
    ctx.B_emp = B;
    ctx.N0 = lattice.max_cell_count();
    ctx.eta = lattice.gap();
    ctx.validate();
    return ExperimentSetup{config, std::move(kernel), std::move(lattice), kc, B, ctx};
}

std::vector<Point> draw_samples(int dim, double R, int r, std::uint64_t seed, std::uint64_t stream)
{
    require(r >= 1, "draw_samples: r must be at least 1");
    require(R > 0.0, "draw_samples: R must be positive");
    require(dim == 1 || dim == 2, "draw_samples: dimension must be 1 or 2");
    auto rng = CounterRng::substream(seed, {0xd7aULL, stream});
    std::vector<Point> pts(static_cast<std::size_t>(r), Point{0.0, 0.0});
    for (Point& x : pts)
        for (int a = 0; a < dim; ++a)
            x[a] = R * (uniform01(rng) - 0.5);
    return pts;
}

// ------------------------------------------------------------- statistics

ZStatistic::ZStatistic(const SynthFunction& f, double R) : f_(f.field()), p_(f.p())
{
    require(f.normalized(), "z_statistic: function must be normalized");
    require(R > 0.0, "z_statistic: R must be positive");
    average_ = std::pow(lp_norm_cube(f, R), p_) / std::pow(R, f.dim());
}

ZStatistic::ZStatistic(ScalarField f, int dim, double p, double R, const QuadratureSettings& quad)
    : f_(std::move(f)), p_(p)
{
    require(R > 0.0, "z_statistic: R must be positive");
    const auto grid = QuadratureGrid::cube(dim, R / 2.0, quad);
    const double pp = p;
    const ScalarField& g = f_;
    average_ = integrate_box([&](const Point& x) { return std::pow(std::abs(g(x)), pp); }, grid) / std::pow(R, dim);
}

double ZStatistic::operator()(const Point& x) const
{
    return std::pow(std::abs(f_(x)), p_) - average_;
}

double z_statistic(const SynthFunction& f, const Point& x, double R)
{
    return ZStatistic(f, R)(x);
}

Interval wilson_interval(long long hits, long long n)
{
    require(n >= 1 && hits >= 0 && hits <= n, "wilson_interval: need 0 <= hits <= n, n >= 1");
    const double nn = static_cast<double>(n);
    const double ph = static_cast<double>(hits) / nn;
    const double z2 = kWilsonZ * kWilsonZ;
    const double denom = 1.0 + z2 / nn;
    const double centre = (ph + z2 / (2.0 * nn)) / denom;
    const double half = kWilsonZ * std::sqrt(ph * (1.0 - ph) / nn + z2 / (4.0 * nn * nn)) / denom;
    // The score interval touches 0 (or 1) exactly when no (or every) trial hits.
    const double lo = hits == 0 ? 0.0 : std::max(0.0, centre - half);
    const double hi = hits == n ? 1.0 : std::min(1.0, centre + half);
    return Interval{lo, hi};
}

bool MomentReport::ok() const noexcept
{
    return std::all_of(margin.begin(), margin.end(), [](double m) { return m >= 0.0; });
}

MomentReport moment_bounds_check(const SynthFunction& f, const SynthFunction& g, const BoundContext& ctx,
                                 int sample_count, std::uint64_t seed)
{
    ctx.validate();
    require(sample_count >= 2, "moment_bounds_check: need at least two draws");
    for (const SynthFunction* h : {&f, &g}) {
        require(h->normalized(), "moment_bounds_check: functions must be normalized");
        require(concentration(*h, ctx.R, ctx.delta).in_class, "moment_bounds_check: function not in V(R, delta)");
    }
    const ZStatistic zf(f, ctx.R);
    const ZStatistic zg(g, ctx.R);
    const double p = ctx.p;
    const double Rn = std::pow(ctx.R, ctx.n);

    std::vector<Point> pts = draw_samples(ctx.n, ctx.R, sample_count, seed, 0x30ULL);
    std::vector<double> a(pts.size()), b(pts.size()), d(pts.size());
    for (std::size_t j = 0; j < pts.size(); ++j) {
        a[j] = zf(pts[j]);
        b[j] = zg(pts[j]);
        d[j] = a[j] - b[j];
    }

    double sup_z = 0.0;
    double sup_d = 0.0;
    double dist = 0.0;
    auto visit = [&](const Point& x, double za, double zb) {
        sup_z = std::max({sup_z, std::abs(za), std::abs(zb)});
        sup_d = std::max(sup_d, std::abs(za - zb));
        dist = std::max(dist, std::abs(f(x) - g(x)));
    };
    for (std::size_t j = 0; j < pts.size(); ++j)
        visit(pts[j], a[j], b[j]);
    for (const Point& x : dense_cube_points(ctx.n, ctx.R, f.settings().op.dense_points))
        visit(x, zf(x), zg(x));

    const double kp = std::pow(ctx.k, p);
    const double kp1 = std::pow(ctx.k, p - 1.0);
    MomentReport out;
    out.sup_distance = dist;
    out.estimate = {std::max(sample_variance(a), sample_variance(b)), sup_z, sample_variance(d), sup_d};
    out.bound = {kp / Rn, kp, 2.0 * p / Rn * kp1 * dist, p * kp1 * dist};
    for (int i = 0; i < 4; ++i)
        out.margin[i] = out.bound[i] - out.estimate[i];
    return out;
}

// ------------------------------------------------------------------ trials

TrialRow evaluate_trial(const SynthFunction& f, std::span<const Point> samples, double R, double delta, double mu)
{
    const double p = f.p();
    double S = 0.0;
    for (const Point& x : samples)
        S += std::pow(std::abs(f(x)), p);
    const double scale = static_cast<double>(samples.size()) / std::pow(R, f.dim());
    TrialRow row;
    row.S = S;
    row.lower = scale * (1.0 - mu - delta);
    row.upper = scale * (1.0 + mu);
    row.success = row.lower <= S && S <= row.upper;
    return row;
}

namespace {

struct TrialOutcome {
    std::vector<TrialRow> rows;
    long long rejections = 0;
};

TrialOutcome run_trial(const ExperimentSetup& setup, int r, double mu, int trial)
{
    const ExperimentConfig& cfg = setup.config;
    const auto t = static_cast<std::uint64_t>(trial);
    const auto rr = static_cast<std::uint64_t>(r);
    const auto samples = draw_samples(setup.kernel.dim(), cfg.R, r, stream_key(cfg.seed, {0x5aULL, rr, t}));
    TrialOutcome out;
    for (int j = 0; j < cfg.functions_per_trial; ++j) {
        const std::uint64_t fs = stream_key(cfg.seed, {0xf0ULL, rr, t, static_cast<std::uint64_t>(j)});
        RandomMember m = sample_random_member(setup.kernel, setup.lattice, cfg.R, cfg.delta, fs, cfg.space);
        TrialRow row = evaluate_trial(m.function, samples, cfg.R, cfg.delta, mu);
        row.trial = trial;
        row.func_seed = fs;
        out.rows.push_back(row);
        out.rejections += m.rejections;
    }
    return out;
}

} // namespace

std::vector<TrialRow> sampling_trial(const ExperimentSetup& setup, int r, double mu, int trial_index)
{
    return run_trial(setup, r, mu, trial_index).rows;
}

TrialReport failure_rate_experiment(const ExperimentSetup& setup, int r, double mu)
{
    const ExperimentConfig& cfg = setup.config;
    require(r >= 1, "failure_rate_experiment: r must be at least 1");
    require(mu > 0.0 && mu < 1.0 - cfg.delta, "failure_rate_experiment: mu must lie in (0, 1 - delta)");

    std::vector<TrialOutcome> outcomes(static_cast<std::size_t>(cfg.trials));
    try {
        parallel_for(outcomes.size(), worker_count(cfg.threads),
                     [&](std::size_t i) { outcomes[i] = run_trial(setup, r, mu, static_cast<int>(i)); });
    } catch (const InfeasibleError& e) {
        throw InfeasibleError(std::string("failure_rate_experiment (r = ") + std::to_string(r) + "): " + e.what());
    }

    TrialReport rep;
    rep.r = r;
    rep.mu = mu;
    rep.trials = cfg.trials;
    rep.A_emp = std::numeric_limits<double>::infinity();
    const double scale = std::pow(cfg.R, setup.kernel.dim()) / r;
    for (const TrialOutcome& o : outcomes) {
        bool ok = true;
        for (const TrialRow& row : o.rows) {
            ok = ok && row.success;
            rep.A_emp = std::min(rep.A_emp, row.S * scale);
            rep.B_emp_samples = std::max(rep.B_emp_samples, row.S * scale);
            rep.rows.push_back(row);
        }
        rep.failures += ok ? 0 : 1;
        rep.rejections += o.rejections;
    }
    rep.failure_rate = static_cast<double>(rep.failures) / rep.trials;
    rep.wilson = wilson_interval(rep.failures, rep.trials);
    rep.bound = success_probability(setup.ctx, r, mu);
    return rep;
}

TrialReport failure_rate_experiment(const ExperimentSetup& setup)
{
    return failure_rate_experiment(setup, setup.config.r, setup.config.mu);
}

// -------------------------------------------------------------- truncation

TruncationReport truncation_experiment(const ExperimentSetup& setup, double eps)
{
    const ExperimentConfig& cfg = setup.config;
    require(eps > 0.0, "truncation_experiment: eps must be positive");
    TruncationReport rep;
    rep.eps = eps;
    rep.N = truncation_N(setup.ctx, eps, 1.0);
    const double eta = setup.lattice.gap();
    const double needed = (rep.N + cfg.truncation_steps * eta) / 2.0 + eta;
    if (setup.lattice.half_width() < needed)
        throw InfeasibleError("truncation_experiment: lattice.half_width = " +
                              std::to_string(setup.lattice.half_width()) + " must be at least " +
                              std::to_string(needed) + " for eps = " + std::to_string(eps) +
                              " (N = " + std::to_string(rep.N) + ")");

    const int members = cfg.truncation_members;
    rep.sweep.assign(static_cast<std::size_t>(members), {});
    parallel_for(static_cast<std::size_t>(members), worker_count(cfg.threads), [&](std::size_t m) {
        auto rng = CounterRng::substream(cfg.seed, {0x7cULL, static_cast<std::uint64_t>(m)});
        std::normal_distribution<double> normal(0.0, 1.0);
        std::vector<double> c(setup.lattice.size());
        for (double& v : c)
            v = normal(rng);
        const SynthFunction f = synthesize(setup.kernel, setup.lattice, c, true, cfg.space, rng.key());
        auto& errs = rep.sweep[m];
        for (int j = 0; j <= cfg.truncation_steps; ++j)
            errs.push_back(lp_norm_cube(truncation_residual(f, rep.N + j * eta), cfg.R));
    });

    rep.all_below = true;
    rep.monotone = true;
    for (const auto& errs : rep.sweep) {
        rep.errors.push_back(errs.front());
        rep.max_ratio = std::max(rep.max_ratio, errs.front() / eps);
        rep.all_below = rep.all_below && errs.front() < eps;
        for (std::size_t j = 1; j < errs.size(); ++j)
            rep.monotone = rep.monotone && errs[j] <= errs[j - 1] * (1.0 + 1e-9);
    }
    return rep;
}

// --------------------------------------------------------------- Bernstein

BernsteinReport bernstein_experiment(const ExperimentSetup& setup, const SynthFunction& f, int r, int trials,
                                     std::uint64_t seed)
{
    require(r >= 1 && trials >= 1, "bernstein_experiment: r and trials must be positive");
    const BoundContext& ctx = setup.ctx;
    const ZStatistic Z(f, ctx.R);
    std::vector<double> sums(static_cast<std::size_t>(trials));
    parallel_for(sums.size(), worker_count(setup.config.threads), [&](std::size_t t) {
        double s = 0.0;
        for (const Point& x : draw_samples(ctx.n, ctx.R, r, seed, 0xbe00ULL + t))
            s += Z(x);
        sums[t] = s;
    });

    BernsteinReport rep;
    rep.r = r;
    rep.trials = trials;
    rep.sigma_sq = std::pow(ctx.k, ctx.p) / std::pow(ctx.R, ctx.n);
    rep.M = std::pow(ctx.k, ctx.p);
    const double unit = 0.5 * std::sqrt(r * rep.sigma_sq);
    rep.dominated = true;
    for (int i = 1; i <= 10; ++i) {
        const double lambda = i * unit;
        const auto hits = std::count_if(sums.begin(), sums.end(), [&](double s) { return std::abs(s) >= lambda; });
        const double freq = static_cast<double>(hits) / trials;
        const double bound = bernstein_probability(lambda, r, rep.sigma_sq, rep.M);
        const double hw = wilson_interval(hits, trials).half_width();
        rep.lambda.push_back(lambda);
        rep.frequency.push_back(freq);
        rep.bound.push_back(bound);
        rep.half_width.push_back(hw);
        rep.dominated = rep.dominated && freq <= bound + hw;
    }
    return rep;
}

// ------------------------------------------------------------- diagnostics

double reproducing_defect(const SynthFunction& f, double R)
{
    require(R > 0.0, "reproducing_defect: R must be positive");
    const ScalarField Tf = apply_T(f.kernel(), f.field(), f.settings().op);
    const auto grid = QuadratureGrid::cube(f.dim(), R / 2.0, f.settings().op.quad);
    const auto fv = f.evaluate_on(grid);
    const auto tv = sample_on(Tf, grid);
    std::vector<double> diff(fv.size());
    for (std::size_t i = 0; i < fv.size(); ++i)
        diff[i] = tv[i] - fv[i];
    const double denom = lp_norm_values(fv, f.p(), grid);
    if (!(denom > 0.0))
        throw DegenerateInputError("reproducing_defect: f vanishes on C_R");
    return lp_norm_values(diff, f.p(), grid) / denom;
}

namespace {

std::string fmt(double v)
{
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

Diagnostic symmetry_check(const KernelSpec& K, std::uint64_t seed)
{
    auto rng = CounterRng::substream(seed, {0x5e3ULL});
    const double h = K.reference_half_width();
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        Point x{0.0, 0.0}, y{0.0, 0.0};
        for (int a = 0; a < K.dim(); ++a) {
            x[a] = h * (2.0 * uniform01(rng) - 1.0);
            y[a] = h * (2.0 * uniform01(rng) - 1.0);
        }
        worst = std::max(worst, std::abs(K(x, y) - K(y, x)));
    }
    return {"symmetry", worst <= 1e-12, worst, 1e-12, "max |K(x,y) - K(y,x)| over 1000 pairs"};
}

std::vector<ScalarField> idempotency_fields(int dim)
{
    std::vector<ScalarField> out;
    for (double c : {0.0, 0.7, -1.3}) {
        out.push_back([c, dim](const Point& x) {
            double s = (x[0] - c) * (x[0] - c);
            if (dim == 2)
                s += (x[1] + 0.5 * c) * (x[1] + 0.5 * c);
            return std::exp(-s / 2.0) * (1.0 + 0.3 * x[0]);
        });
    }
    return out;
}

Diagnostic frame_envelope_check(const ExperimentSetup& s)
{
    const KernelSpec& K = s.kernel;
    const int dim = K.dim();
    const double eta = s.lattice.gap();
    const double amp = std::pow(eta, dim / K.p_conj()) * K.decay_amplitude();
    const auto pts = dense_cube_points(dim, 2.0 * s.config.R, dim == 1 ? 41 : 11);
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t n = 0; n < s.lattice.size(); ++n) {
        if (!s.lattice.inside(n, s.config.R / 2.0))
            continue;
        const Point& g = s.lattice.nodes()[n];
        for (const Point& x : pts) {
            const double d = l1_norm({g[0] - x[0], g[1] - x[1]}, dim);
            const double env = amp * std::pow(1.0 - dim * eta / 2.0 + d, -K.decay_rate());
            worst = std::max(worst, std::abs(phi_gamma(K, s.lattice, n, x, s.config.space)) - env);
        }
    }
    return {"frame_function_envelope", worst <= 1e-9, worst, 1e-9,
            "max |phi_gamma(x)| - eta^{n/p'} C (1 - n eta/2 + |gamma - x|_1)^-alpha"};
}

} // namespace

std::vector<Diagnostic> run_diagnostics(const ExperimentSetup& s)
{
    const ExperimentConfig& cfg = s.config;
    const KernelSpec& K = s.kernel;
    std::vector<Diagnostic> out;

    out.push_back(symmetry_check(K, cfg.seed));

    {
        Diagnostic d{"idempotency", false, 0.0, 1e-8, "max ||T^2 f - T f|| / ||T f|| on C_R"};
        try {
            const auto fields = idempotency_fields(K.dim());
            d.value = idempotency_defect(K, fields, cfg.R, cfg.space.op);
            d.passed = d.value < d.threshold;
        } catch (const DegenerateInputError& e) {
            d.detail = e.what();
        }
        out.push_back(d);
    }

    {
        const DecayCheck dc = decay_envelope_check(K, 1000, cfg.seed);
        out.push_back({"decay_envelope", dc.holds, dc.worst_ratio, 1.0,
                       "max |K(x,y)| (1 + |x - y|_1)^alpha / C over 1000 pairs"});
    }

    {
        const auto os = default_oscillation_settings(K.dim());
        const double m1 = oscillation_modulus(K, 0.1, os);
        const double m2 = oscillation_modulus(K, 0.05, os);
        const double m3 = oscillation_modulus(K, 0.025, os);
        out.push_back({"oscillation_decreasing", m1 > m2 && m2 > m3, m3, m2,
                       "modulus at eps = 0.1, 0.05, 0.025: " + fmt(m1) + ", " + fmt(m2) + ", " + fmt(m3)});
    }

    out.push_back(frame_envelope_check(s));

    const int members = std::max(cfg.diagnostic_members, 2 * cfg.moment_pairs);
    std::vector<std::optional<SynthFunction>> pool(static_cast<std::size_t>(members));
    parallel_for(pool.size(), worker_count(cfg.threads), [&](std::size_t i) {
        const std::uint64_t fs = stream_key(cfg.seed, {0xd1aULL, static_cast<std::uint64_t>(i)});
        pool[i] = sample_random_member(K, s.lattice, cfg.R, cfg.delta, fs, cfg.space).function;
    });

    {
        const double tol = K.family() == KernelFamily::spline_projector ? 1e-3 : 1e-6;
        std::vector<double> defects(static_cast<std::size_t>(cfg.diagnostic_members));
        parallel_for(defects.size(), worker_count(cfg.threads),
                     [&](std::size_t i) { defects[i] = reproducing_defect(*pool[i], cfg.R); });
        const double worst = *std::max_element(defects.begin(), defects.end());
        out.push_back({"reproducing_identity", worst < tol, worst, tol,
                       "max ||Tf - f|| / ||f|| on C_R over " + std::to_string(defects.size()) + " members"});
    }

    {
        const double D = D_constant(s.ctx);
        double worst = 0.0;
        int violations = 0;
        for (int i = 0; i < cfg.diagnostic_members; ++i) {
            const SynthFunction& f = *pool[static_cast<std::size_t>(i)];
            const double ratio = linf_norm_CR(f, cfg.R) / (D * lp_norm_cube(f, cfg.R));
            worst = std::max(worst, ratio);
            violations += ratio > 1.0 ? 1 : 0;
        }
        out.push_back({"sup_norm_bound", violations == 0, worst, 1.0,
                       "max ||f||_inf / (D ||f||_p) on C_R; violations = " + std::to_string(violations)});
    }

    {
        std::vector<MomentReport> reps(static_cast<std::size_t>(cfg.moment_pairs));
        parallel_for(reps.size(), worker_count(cfg.threads), [&](std::size_t i) {
            reps[i] = moment_bounds_check(*pool[2 * i], *pool[2 * i + 1], s.ctx, cfg.moment_draws,
                                          stream_key(cfg.seed, {0x3a1ULL, i}));
        });
        std::array<double, 4> worst;
        worst.fill(std::numeric_limits<double>::infinity());
        for (const MomentReport& m : reps)
            for (int i = 0; i < 4; ++i)
                worst[i] = std::min(worst[i], m.margin[i]);
        static constexpr const char* names[4] = {"moment_variance", "moment_sup", "moment_diff_variance",
                                                 "moment_diff_sup"};
        for (int i = 0; i < 4; ++i)
            out.push_back({names[i], worst[i] >= 0.0, worst[i], 0.0,
                           "smallest margin over " + std::to_string(reps.size()) + " pairs"});
    }
    return out;
}

// ------------------------------------------------------------------ output

std::string format_double(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace {

nlohmann::json finite_or_string(double v)
{
    if (std::isfinite(v))
        return v;
    return format_double(v);
}

} // namespace

nlohmann::json to_json(const SuccessBound& b)
{
    return {{"exponent", finite_or_string(b.exponent)}, {"log_failure_bound", finite_or_string(b.log_failure)},
            {"raw", finite_or_string(b.raw)},          {"clamped", b.clamped},
            {"vacuous", b.vacuous},                    {"phi", finite_or_string(b.phi)},
            {"gate", b.gate}};
}

nlohmann::json to_json(const TrialReport& r, bool include_rows)
{
    nlohmann::json j = {{"r", r.r},
                        {"mu", r.mu},
                        {"trials", r.trials},
                        {"failures", r.failures},
                        {"failure_rate", r.failure_rate},
                        {"wilson_95", {r.wilson.lo, r.wilson.hi}},
                        {"A_emp", finite_or_string(r.A_emp)},
                        {"B_emp_samples", r.B_emp_samples},
                        {"rejections", r.rejections},
                        {"generator", "gaussian-coefficients"},
                        {"theoretical_bound", to_json(r.bound)}};
    if (include_rows) {
        nlohmann::json rows = nlohmann::json::array();
        for (const TrialRow& row : r.rows)
            rows.push_back({{"trial", row.trial},
                            {"func_seed", row.func_seed},
                            {"S", row.S},
                            {"lower", row.lower},
                            {"upper", row.upper},
                            {"success", row.success}});
        j["rows"] = std::move(rows);
    }
    return j;
}

nlohmann::json to_json(const TruncationReport& r)
{
    return {{"eps", r.eps},           {"N", r.N},
            {"errors", r.errors},     {"sweep", r.sweep},
            {"max_ratio", r.max_ratio}, {"all_below", r.all_below},
            {"monotone", r.monotone}};
}

nlohmann::json to_json(const BernsteinReport& r)
{
    return {{"r", r.r},
            {"trials", r.trials},
            {"sigma_sq", r.sigma_sq},
            {"M", r.M},
            {"lambda", r.lambda},
            {"frequency", r.frequency},
            {"bound", r.bound},
            {"wilson_half_width", r.half_width},
            {"dominated", r.dominated}};
}

std::string trial_csv(const TrialReport& report, const std::string& digest)
{
    std::string out = "# config_digest: " + digest + "\n";
    out += "trial,func_seed,S,lower,upper,success\n";
    for (const TrialRow& row : report.rows) {
        out += std::to_string(row.trial);
        out += ',';
        out += std::to_string(row.func_seed);
        out += ',';
        out += format_double(row.S);
        out += ',';
        out += format_double(row.lower);
        out += ',';
        out += format_double(row.upper);
        out += ',';
        out += row.success ? '1' : '0';
        out += '\n';
    }
    return out;
}

std::string sweep_csv(std::span<const TrialReport> reports, const std::string& digest)
{
    std::string out = "# config_digest: " + digest + "\n";
    out += "r,mu,trials,failures,failure_rate,wilson_lo,wilson_hi,log_failure_bound,bound_clamped,vacuous,gate\n";
    for (const TrialReport& r : reports) {
        out += std::to_string(r.r) + ',' + format_double(r.mu) + ',' + std::to_string(r.trials) + ',' +
               std::to_string(r.failures) + ',' + format_double(r.failure_rate) + ',' + format_double(r.wilson.lo) +
               ',' + format_double(r.wilson.hi) + ',' + format_double(r.bound.log_failure) + ',' +
               format_double(r.bound.clamped) + ',' + (r.bound.vacuous ? '1' : '0') + ',' + (r.bound.gate ? '1' : '0') +
               '\n';
    }
    return out;
}

} // namespace rks
