#include "rks/kernels.hpp"

#include "rks/errors.hpp"
#include "rks/random.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

namespace rks {

std::string_view to_string(KernelFamily family) noexcept
{
    switch (family) {
    case KernelFamily::finite_rank_orthogonal:
        return "finite-rank-orthogonal";
    case KernelFamily::spline_projector:
        return "spline-projector";
    case KernelFamily::rank_one_gaussian:
        return "rank-one-gaussian";
    case KernelFamily::envelope:
        return "envelope";
    case KernelFamily::zero:
        return "zero";
    }
    return "unknown";
}

KernelSpec::KernelSpec(Parts parts)
{
    const auto& prm = parts.params;
    if (prm.dim < 1 || prm.dim > kMaxDim)
        throw ContractError("kernel: dimension must be 1 or 2");
    if (!(prm.p > 1.0) || !std::isfinite(prm.p))
        throw ContractError("kernel: exponent p must lie in (1, inf)");
    if (!(parts.decay_amplitude > 0.0) || !std::isfinite(parts.decay_amplitude))
        throw ContractError("kernel: decay amplitude C must be positive and finite");
    const double p_conj = prm.p / (prm.p - 1.0);
    const double margin = prm.alpha - prm.dim / p_conj - prm.dim - 1.0;
    if (!(margin > 0.0))
        throw InfeasibleError("kernel: decay rate alpha = " + std::to_string(prm.alpha) +
                              " violates alpha > n/p' + n + 1 = " +
                              std::to_string(prm.dim / p_conj + prm.dim + 1.0));
    if (!parts.eval)
        throw ContractError("kernel: evaluator missing");
    data_ = std::make_shared<const Parts>(std::move(parts));
}

DecayModel KernelSpec::row_decay(const Point& x) const
{
    if (data_->support_half_width)
        return CompactSupport{*data_->support_half_width};
    return PowerEnvelope{decay_amplitude(), 1.0, decay_rate(), x};
}

KernelSpec KernelSpec::scaled(double c) const
{
    Parts parts = *data_;
    parts.params.scale *= c;
    const double a = std::abs(c);
    parts.decay_amplitude = (a > 0.0) ? parts.decay_amplitude * a : parts.decay_amplitude;
    if (parts.params.decay_amplitude)
        parts.params.decay_amplitude = parts.decay_amplitude;
    auto inner = data_->eval;
    parts.eval = [inner, c](const Point& x, const Point& y) { return c * inner(x, y); };
    return KernelSpec(std::move(parts));
}

KernelSpec KernelSpec::with_decay_amplitude(double C) const
{
    Parts parts = *data_;
    parts.decay_amplitude = C;
    parts.params.decay_amplitude = C;
    return KernelSpec(std::move(parts));
}

void hermite_functions(double t, std::span<double> out)
{
    if (out.empty())
        return;
    const double h0 = std::pow(std::numbers::pi, -0.25) * std::exp(-0.5 * t * t);
    out[0] = h0;
    if (out.size() == 1)
        return;
    out[1] = std::numbers::sqrt2 * t * h0;
    for (std::size_t k = 1; k + 1 < out.size(); ++k) {
        const double kk = static_cast<double>(k);
        out[k + 1] = std::sqrt(2.0 / (kk + 1.0)) * t * out[k] - std::sqrt(kk / (kk + 1.0)) * out[k - 1];
    }
}

double cubic_bspline(double t) noexcept
{
    const double a = std::abs(t);
    if (a < 1.0)
        return 2.0 / 3.0 - a * a + 0.5 * a * a * a;
    if (a < 2.0) {
        const double b = 2.0 - a;
        return b * b * b / 6.0;
    }
    return 0.0;
}

namespace {

// Separable evaluator: scale * prod_a u(x_a)^T M u(y_a).
KernelEvaluator separable_evaluator(std::shared_ptr<const AxisBasis> basis, int dim, double scale)
{
    return [basis, dim, scale](const Point& x, const Point& y) {
        thread_local std::vector<double> ux;
        thread_local std::vector<double> uy;
        const std::size_t m = basis->size;
        ux.resize(m);
        uy.resize(m);
        double value = scale;
        for (int a = 0; a < dim; ++a) {
            basis->eval(x[a], ux);
            basis->eval(y[a], uy);
            Eigen::Map<const Eigen::VectorXd> vx(ux.data(), static_cast<Eigen::Index>(m));
            Eigen::Map<const Eigen::VectorXd> vy(uy.data(), static_cast<Eigen::Index>(m));
            value *= vx.dot(basis->coupling * vy);
        }
        return value;
    };
}

std::shared_ptr<AxisBasis> hermite_basis(int rank, double width)
{
    if (rank < 1)
        throw ContractError("hermite kernel: rank must be >= 1");
    if (!(width > 0.0))
        throw ContractError("hermite kernel: width must be positive");
    auto basis = std::make_shared<AxisBasis>();
    basis->size = static_cast<std::size_t>(rank);
    const double inv_sqrt_w = 1.0 / std::sqrt(width);
    basis->eval = [width, inv_sqrt_w](double t, std::span<double> out) {
        hermite_functions(t / width, out);
        for (double& v : out)
            v *= inv_sqrt_w;
    };
    basis->coupling = Eigen::MatrixXd::Identity(rank, rank);
    basis->gram = Eigen::MatrixXd::Identity(rank, rank);
    return basis;
}

std::shared_ptr<AxisBasis> spline_basis(int extent)
{
    if (extent < 1)
        throw ContractError("spline kernel: lattice extent must be >= 1");
    const int m = 2 * extent + 1;
    auto basis = std::make_shared<AxisBasis>();
    basis->size = static_cast<std::size_t>(m);
    basis->eval = [extent](double t, std::span<double> out) {
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i] = cubic_bspline(t - (static_cast<double>(i) - extent));
    };
    // <beta(. - k), beta(. - l)> is the degree-7 B-spline at k - l.
    const double b7[4] = {2416.0 / 5040.0, 1191.0 / 5040.0, 120.0 / 5040.0, 1.0 / 5040.0};
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            if (std::abs(i - j) <= 3)
                gram(i, j) = b7[std::abs(i - j)];
    basis->gram = gram;
    basis->coupling = gram.ldlt().solve(Eigen::MatrixXd::Identity(m, m));
    basis->coupling = 0.5 * (basis->coupling + basis->coupling.transpose()).eval();
    basis->support_half_width = extent + 2.0;
    return basis;
}

std::shared_ptr<AxisBasis> gaussian_basis(int dim, double norm_sq, double width)
{
    if (!(norm_sq > 0.0) || !(width > 0.0))
        throw ContractError("gaussian_rank1 kernel: norm_sq and width must be positive");
    auto basis = std::make_shared<AxisBasis>();
    basis->size = 1;
    const double axis_norm_sq = std::pow(norm_sq, 1.0 / dim);
    const double amp = std::sqrt(axis_norm_sq / (width * std::sqrt(std::numbers::pi)));
    basis->eval = [amp, width](double t, std::span<double> out) {
        out[0] = amp * std::exp(-0.5 * (t / width) * (t / width));
    };
    basis->coupling = Eigen::MatrixXd::Identity(1, 1);
    basis->gram = Eigen::MatrixXd::Constant(1, 1, axis_norm_sq);
    return basis;
}

} // namespace

KernelSpec make_kernel(const KernelParams& params)
{
    KernelSpec::Parts parts;
    parts.params = params;
    const int dim = params.dim;
    if (dim < 1 || dim > kMaxDim)
        throw ContractError("kernel: dimension must be 1 or 2");

    if (params.name == "hermite") {
        parts.family = KernelFamily::finite_rank_orthogonal;
        parts.axis_basis = hermite_basis(params.rank, params.width);
        parts.reference_half_width = std::ceil((std::sqrt(2.0 * params.rank + 1.0) + 5.0) * params.width);
    } else if (params.name == "spline") {
        parts.family = KernelFamily::spline_projector;
        parts.axis_basis = spline_basis(params.spline_extent);
        parts.support_half_width = params.spline_extent + 2.0;
        parts.reference_half_width = params.spline_extent + 3.0;
    } else if (params.name == "gaussian_rank1") {
        parts.family = KernelFamily::rank_one_gaussian;
        parts.axis_basis = gaussian_basis(dim, params.norm_sq, params.width);
        parts.reference_half_width = std::ceil(6.0 * params.width);
    } else if (params.name == "envelope") {
        parts.family = KernelFamily::envelope;
        const double C = params.decay_amplitude.value_or(1.0);
        const double alpha = params.alpha;
        const double scale = params.scale;
        parts.eval = [C, alpha, scale, dim](const Point& x, const Point& y) {
            Point d{x[0] - y[0], x[1] - y[1]};
            return scale * C / std::pow(1.0 + l1_norm(d, dim), alpha);
        };
        parts.decay_amplitude = C * std::abs(scale);
        parts.reference_half_width = 8.0;
    } else if (params.name == "zero") {
        parts.family = KernelFamily::zero;
        parts.eval = [](const Point&, const Point&) { return 0.0; };
        parts.decay_amplitude = params.decay_amplitude.value_or(1.0);
        parts.reference_half_width = 8.0;
    } else {
        throw ContractError("kernel: unknown kernel name '" + params.name + "'");
    }

    if (parts.axis_basis) {
        parts.eval = separable_evaluator(parts.axis_basis, dim, params.scale);
        if (params.decay_amplitude) {
            parts.decay_amplitude = *params.decay_amplitude;
        } else {
            // Validate the exponent before spending time on the fit.
            KernelSpec::Parts probe = parts;
            probe.decay_amplitude = 1.0;
            KernelSpec{probe};
            parts.decay_amplitude = fit_decay_amplitude(parts.eval, dim, params.alpha, parts.reference_half_width);
        }
    } else if (params.decay_amplitude && params.name != "envelope") {
        parts.decay_amplitude = *params.decay_amplitude;
    }
    return KernelSpec(std::move(parts));
}

double fit_decay_amplitude(const KernelEvaluator& kernel, int dim, double alpha, double half_width)
{
    const int vars = 2 * dim;
    const int per_axis = (dim == 1) ? 241 : 17;
    const double spacing = 2.0 * half_width / (per_axis - 1);

    auto objective = [&](const std::array<double, 4>& v) {
        Point x{v[0], dim == 2 ? v[1] : 0.0};
        Point y{v[dim == 2 ? 2 : 1], dim == 2 ? v[3] : 0.0};
        Point d{x[0] - y[0], x[1] - y[1]};
        return std::abs(kernel(x, y)) * std::pow(1.0 + l1_norm(d, dim), alpha);
    };

    struct Candidate {
        double value;
        std::array<double, 4> at;
    };
    std::vector<Candidate> best;
    const std::size_t keep = 16;

    std::size_t total = 1;
    for (int i = 0; i < vars; ++i)
        total *= per_axis;
    for (std::size_t idx = 0; idx < total; ++idx) {
        std::array<double, 4> v{0, 0, 0, 0};
        std::size_t rest = idx;
        for (int i = 0; i < vars; ++i) {
            v[i] = -half_width + spacing * static_cast<double>(rest % per_axis);
            rest /= per_axis;
        }
        const double val = objective(v);
        if (best.size() < keep || val > best.back().value) {
            Candidate c{val, v};
            auto pos = std::upper_bound(best.begin(), best.end(), c,
                                        [](const Candidate& a, const Candidate& b) { return a.value > b.value; });
            best.insert(pos, c);
            if (best.size() > keep)
                best.pop_back();
        }
    }

    double top = best.empty() ? 0.0 : best.front().value;
    for (Candidate c : best) {
        double step = spacing;
        while (step > 1e-7 * half_width) {
            bool improved = false;
            for (int i = 0; i < vars; ++i) {
                for (double dir : {-1.0, 1.0}) {
                    auto trial = c.at;
                    trial[i] = std::clamp(trial[i] + dir * step, -half_width, half_width);
                    const double val = objective(trial);
                    if (val > c.value) {
                        c.value = val;
                        c.at = trial;
                        improved = true;
                    }
                }
            }
            if (!improved)
                step *= 0.5;
        }
        top = std::max(top, c.value);
    }
    if (!(top > 0.0))
        return 1.0;
    return 1.01 * top;
}

double apply_T(const KernelSpec& spec, const ScalarField& f, const Point& x, const OperatorSettings& settings)
{
    const auto grid = QuadratureGrid::cube(spec.dim(), settings.truncation_half_width, settings.quad);
    std::vector<double> values(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const Point y = grid.node(i);
        values[i] = spec(x, y) * f(y);
    }
    return integrate_values(values, grid);
}

namespace {

// Tf(x) = scale * u(x_1)^T M C M^T u(x_2) with C the weighted moments of f
// against the axis basis; same quadrature as the generic path.
ScalarField apply_T_separable(const KernelSpec& spec, const QuadratureGrid& grid, const std::vector<double>& samples)
{
    const AxisBasis& basis = *spec.axis_basis();
    const auto m = static_cast<Eigen::Index>(basis.size);
    const auto nodes = grid.axis_nodes(0);
    const auto weights = grid.axis_weights(0);
    const auto q = static_cast<Eigen::Index>(nodes.size());
    Eigen::MatrixXd U(m, q);
    std::vector<double> u(basis.size);
    for (Eigen::Index j = 0; j < q; ++j) {
        basis.eval(nodes[j], u);
        for (Eigen::Index i = 0; i < m; ++i)
            U(i, j) = u[i] * weights[j];
    }
    Eigen::MatrixXd C;
    if (spec.dim() == 1) {
        C = U * Eigen::Map<const Eigen::VectorXd>(samples.data(), q);
    } else {
        // Row-major samples: F(i1, i2) with the last axis fastest.
        const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> F(samples.data(), q, q);
        C = U * F * U.transpose();
    }
    const Eigen::MatrixXd& M = basis.coupling;
    Eigen::MatrixXd R = spec.scale() * (M * C);
    if (spec.dim() == 2)
        R *= M.transpose();
    auto reduced = std::make_shared<const Eigen::MatrixXd>(std::move(R));
    const int dim = spec.dim();
    return [spec, reduced, dim](const Point& x) {
        const AxisBasis& b = *spec.axis_basis();
        thread_local std::vector<double> ux, uy;
        ux.resize(b.size);
        b.eval(x[0], ux);
        Eigen::Map<const Eigen::VectorXd> vx(ux.data(), static_cast<Eigen::Index>(b.size));
        if (dim == 1)
            return vx.dot(reduced->col(0));
        uy.resize(b.size);
        b.eval(x[1], uy);
        Eigen::Map<const Eigen::VectorXd> vy(uy.data(), static_cast<Eigen::Index>(b.size));
        return vx.dot(*reduced * vy);
    };
}

} // namespace

ScalarField apply_T(const KernelSpec& spec, const ScalarField& f, const OperatorSettings& settings)
{
    auto grid = std::make_shared<const QuadratureGrid>(
        QuadratureGrid::cube(spec.dim(), settings.truncation_half_width, settings.quad));
    auto samples = std::make_shared<const std::vector<double>>(sample_on(f, *grid));
    if (spec.axis_basis())
        return apply_T_separable(spec, *grid, *samples);
    return [spec, grid, samples](const Point& x) {
        std::vector<double> values(grid->size());
        for (std::size_t i = 0; i < grid->size(); ++i)
            values[i] = spec(x, grid->node(i)) * (*samples)[i];
        return integrate_values(values, *grid);
    };
}

double idempotency_defect(const KernelSpec& spec, std::span<const ScalarField> fields, double R,
                          const OperatorSettings& settings)
{
    if (!(R > 0.0))
        throw ContractError("idempotency_defect: R must be positive");
    const auto cube = QuadratureGrid::cube(spec.dim(), R / 2.0, settings.quad);
    double worst = 0.0;
    bool any = false;
    for (const auto& f : fields) {
        const ScalarField Tf = apply_T(spec, f, settings);
        const ScalarField TTf = apply_T(spec, Tf, settings);
        const auto tf = sample_on(Tf, cube);
        const auto ttf = sample_on(TTf, cube);
        const double denom = lp_norm_values(tf, spec.p(), cube);
        if (denom < 1e-12)
            continue;
        any = true;
        std::vector<double> diff(tf.size());
        for (std::size_t i = 0; i < diff.size(); ++i)
            diff[i] = ttf[i] - tf[i];
        worst = std::max(worst, lp_norm_values(diff, spec.p(), cube) / denom);
    }
    if (!any)
        throw DegenerateInputError("idempotency_defect: every test field is annihilated by T");
    return worst;
}

GlobalNorm kernel_row_norm(const KernelSpec& spec, const Point& x, const OperatorSettings& settings)
{
    const double q = spec.p_conj();
    const DecayModel model = spec.row_decay(x);
    double T = std::max(settings.truncation_half_width, std::ceil(linf_norm(x, spec.dim())) + 2.0);
    if (const auto* support = std::get_if<CompactSupport>(&model))
        T = std::max(T, std::ceil(support->half_width));
    const ScalarField row = [&](const Point& y) { return spec(x, y); };
    for (int attempt = 0; attempt < 64; ++attempt, T += 2.0) {
        GlobalNorm g = lp_norm_global(row, q, spec.dim(), T, model, settings.quad);
        if (g.tail_bound <= 1e-3 * std::pow(g.value, q))
            return g;
    }
    throw InfeasibleError("kernel_row_norm: tail bound never fell below tolerance");
}

namespace {

KernelConstants k_sup_tensor(const KernelSpec& spec, double R, const OperatorSettings& settings)
{
    // ||K(x,.)||_{L^q(R^2)} = |scale| * prod_a ||K_1(x_a,.)||_{L^q(R)}.
    const AxisBasis& basis = *spec.axis_basis();
    const double q = spec.p_conj();
    double T = std::max(settings.truncation_half_width, spec.reference_half_width());
    if (std::isfinite(basis.support_half_width))
        T = std::max(T, std::ceil(basis.support_half_width));
    const auto grid = QuadratureGrid::cube(1, T, settings.quad);
    const auto axis_points = dense_cube_points(1, R, settings.dense_points);

    const std::size_t m = basis.size;
    Eigen::MatrixXd U(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(grid.size()));
    std::vector<double> u(m);
    for (std::size_t j = 0; j < grid.size(); ++j) {
        basis.eval(grid.node(j)[0], u);
        for (std::size_t i = 0; i < m; ++i)
            U(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = u[i];
    }
    const Eigen::MatrixXd MU = basis.coupling * U;

    double best = -1.0;
    double best_s = 0.0;
    for (const Point& s : axis_points) {
        basis.eval(s[0], u);
        Eigen::Map<const Eigen::VectorXd> us(u.data(), static_cast<Eigen::Index>(m));
        const Eigen::VectorXd row = (us.transpose() * MU).transpose();
        std::vector<double> values(row.data(), row.data() + row.size());
        const double norm = lp_norm_values(values, q, grid);
        if (norm > best) {
            best = norm;
            best_s = s[0];
        }
    }
    KernelConstants out;
    out.R = R;
    out.points_per_axis = settings.dense_points;
    out.k = std::abs(spec.scale()) * best * best;
    out.argmax = {best_s, best_s};
    return out;
}

} // namespace

KernelConstants k_sup_over(const KernelSpec& spec, std::span<const Point> points, const OperatorSettings& settings)
{
    KernelConstants out;
    out.k = -1.0;
    for (const Point& x : points) {
        const double v = kernel_row_norm(spec, x, settings).value;
        if (v > out.k) {
            out.k = v;
            out.argmax = x;
        }
    }
    return out;
}

KernelConstants k_sup(const KernelSpec& spec, double R, const OperatorSettings& settings)
{
    if (!(R > 0.0))
        throw ContractError("k_sup: R must be positive");
    if (settings.dense_points < 64)
        throw ContractError("k_sup: the sup grid needs at least 64 points per axis");
    if (spec.dim() == 2 && spec.axis_basis())
        return k_sup_tensor(spec, R, settings);
    const auto points = dense_cube_points(spec.dim(), R, settings.dense_points);
    KernelConstants out = k_sup_over(spec, points, settings);
    out.R = R;
    out.points_per_axis = settings.dense_points;
    return out;
}

OscillationSettings default_oscillation_settings(int dim)
{
    OscillationSettings s;
    if (dim == 2) {
        s.quad = QuadratureSettings{4, 2.0};
        s.shift_points = 9;
    }
    return s;
}

double oscillation_modulus(const KernelSpec& spec, double eps, const OscillationSettings& settings)
{
    if (eps < 0.0 || !std::isfinite(eps))
        throw ContractError("oscillation_modulus: eps must be a finite value >= 0");
    if (eps == 0.0)
        return 0.0;
    const int dim = spec.dim();
    const double h = settings.half_width > 0.0 ? settings.half_width : spec.reference_half_width();
    const auto u_grid = QuadratureGrid::cube(dim, h, settings.quad);
    const auto shifts = dense_cube_points(dim, 2.0 * h, settings.shift_points);

    // Offsets (x', y') in [-eps, eps]^{2n}.
    std::vector<double> axis(settings.perturbation_points);
    for (int i = 0; i < settings.perturbation_points; ++i)
        axis[i] = -eps + 2.0 * eps * i / (settings.perturbation_points - 1);
    std::vector<std::pair<Point, Point>> offsets;
    if (dim == 1) {
        for (double a : axis)
            for (double b : axis)
                offsets.push_back({{a, 0.0}, {b, 0.0}});
    } else {
        for (double a0 : axis)
            for (double a1 : axis)
                for (double b0 : axis)
                    for (double b1 : axis)
                        offsets.push_back({{a0, a1}, {b0, b1}});
    }

    std::vector<double> values(u_grid.size());
    for (std::size_t i = 0; i < u_grid.size(); ++i) {
        const Point u = u_grid.node(i);
        double sup = 0.0;
        for (const Point& z : shifts) {
            const Point x{u[0] + z[0], u[1] + z[1]};
            const double base = spec(x, z);
            for (const auto& [dx, dy] : offsets) {
                const double v = spec({x[0] + dx[0], x[1] + dx[1]}, {z[0] + dy[0], z[1] + dy[1]});
                sup = std::max(sup, std::abs(v - base));
            }
        }
        values[i] = sup;
    }
    return integrate_values(values, u_grid);
}

DecayCheck decay_envelope_check(const KernelSpec& spec, int trial_points, std::uint64_t seed)
{
    if (trial_points < 1)
        throw ContractError("decay_envelope_check: need at least one trial point");
    const int dim = spec.dim();
    const double h = spec.reference_half_width();
    auto rng = CounterRng::substream(seed, {0xdecaULL});
    std::uniform_real_distribution<double> coord(-h, h);

    DecayCheck out;
    out.worst_ratio = -1.0;
    for (int t = 0; t < trial_points; ++t) {
        Point x{coord(rng), 0.0};
        if (dim == 2)
            x[1] = coord(rng);
        Point y{coord(rng), 0.0};
        if (dim == 2)
            y[1] = coord(rng);
        const Point d{x[0] - y[0], x[1] - y[1]};
        const double ratio =
            std::abs(spec(x, y)) * std::pow(1.0 + l1_norm(d, dim), spec.decay_rate()) / spec.decay_amplitude();
        if (ratio > out.worst_ratio) {
            out.worst_ratio = ratio;
            out.worst_x = x;
            out.worst_y = y;
        }
    }
    out.holds = out.worst_ratio <= 1.0 + 1e-12; // rounding slack
    return out;
}

} // namespace rks
