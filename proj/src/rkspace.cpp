#include "rks/rkspace.hpp"

#include "rks/errors.hpp"
#include "rks/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <string>
#include <utility>

namespace rks {

// ---------------------------------------------------------------- Lattice

Lattice Lattice::uniform(int dim, double gap, double half_width)
{
    if (!(gap > 0.0))
        throw ContractError("lattice: gap must be positive");
    if (!(half_width >= 0.0))
        throw ContractError("lattice: half-width must be non-negative");
    const long K = static_cast<long>(std::floor(half_width / gap + 1e-9));
    std::vector<Point> nodes;
    if (dim == 1) {
        for (long i = -K; i <= K; ++i)
            nodes.push_back({gap * static_cast<double>(i), 0.0});
    } else if (dim == 2) {
        for (long i = -K; i <= K; ++i)
            for (long j = -K; j <= K; ++j)
                nodes.push_back({gap * static_cast<double>(i), gap * static_cast<double>(j)});
    }
    return Lattice(dim, gap, half_width, std::move(nodes));
}

Lattice::Lattice(int dim, double gap, double half_width, std::vector<Point> nodes)
    : dim_(dim), gap_(gap), half_width_(half_width), nodes_(std::move(nodes))
{
    if (dim < 1 || dim > kMaxDim)
        throw ContractError("lattice: dimension must be 1 or 2");
    if (!(gap > 0.0) || !(gap < 2.0 / dim))
        throw ContractError("lattice: gap must satisfy 0 < gap < 2/n");
    for (const Point& g : nodes_)
        if (linf_norm(g, dim) > half_width + 1e-12)
            throw ContractError("lattice: node outside the working box");
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        for (std::size_t j = i + 1; j < nodes_.size(); ++j) {
            const Point d{nodes_[i][0] - nodes_[j][0], nodes_[i][1] - nodes_[j][1]};
            if (l1_norm(d, dim) < gap * (1.0 - 1e-12))
                throw ContractError("lattice: nodes closer than the declared gap");
        }
    }
}

int Lattice::max_cell_count() const
{
    std::map<std::pair<long, long>, int> counts;
    constexpr double tol = 1e-12;
    for (const Point& g : nodes_) {
        std::array<std::vector<long>, 2> ks;
        for (int a = 0; a < kMaxDim; ++a) {
            if (a >= dim_) {
                ks[a] = {0};
                continue;
            }
            for (long k = static_cast<long>(std::floor(g[a] - 0.5 - tol));
                 k <= static_cast<long>(std::ceil(g[a] + 0.5 + tol)); ++k)
                if (std::abs(g[a] - static_cast<double>(k)) <= 0.5 + tol)
                    ks[a].push_back(k);
        }
        for (long k0 : ks[0])
            for (long k1 : ks[1])
                ++counts[{k0, k1}];
    }
    int best = 0;
    for (const auto& [key, c] : counts)
        best = std::max(best, c);
    return best;
}

bool Lattice::inside(std::size_t node, double half_extent) const noexcept
{
    return linf_norm(nodes_[node], dim_) <= half_extent + 1e-12;
}

// ---------------------------------------------------------- frame functions

namespace {

QuadratureGrid frame_grid(int dim, double gap, const SpaceSettings& settings)
{
    return QuadratureGrid(dim, Point{0.0, 0.0}, Point{gap / 2.0, gap / 2.0}, settings.frame_cells,
                          settings.frame_order);
}

} // namespace

double phi_gamma(const KernelSpec& spec, const Lattice& lattice, std::size_t node, const Point& x,
                 const SpaceSettings& settings)
{
    if (node >= lattice.size())
        throw ContractError("phi_gamma: node index outside the lattice");
    const int dim = spec.dim();
    const Point& g = lattice.nodes()[node];
    const auto grid = frame_grid(dim, lattice.gap(), settings);
    double sum = 0.0;
    for (std::size_t q = 0; q < grid.size(); ++q) {
        const Point z = grid.node(q);
        sum += grid.weight(q) * spec({g[0] + z[0], g[1] + z[1]}, x);
    }
    return std::pow(lattice.gap(), -dim / spec.p()) * sum;
}

// ---------------------------------------------------------- SynthFunction

struct SynthFunction::State {
    KernelSpec kernel;
    std::shared_ptr<const Lattice> lattice;
    SpaceSettings settings;
    std::vector<double> coefficients;
    // Coefficients against the kernel's axis basis: b_i (n = 1) or B(i, j)
    // row-major (n = 2), so that f(x) = u(x_0)^T B u(x_1).
    std::vector<double> basis_coefficients;
    bool has_basis = false;
    bool normalized = false;
    std::optional<double> norm;
    std::uint64_t seed = 0;
};

namespace {

using State = SynthFunction::State;

Eigen::MatrixXd axis_values(const AxisBasis& basis, std::span<const double> points)
{
    const auto m = static_cast<Eigen::Index>(basis.size);
    Eigen::MatrixXd U(m, static_cast<Eigen::Index>(points.size()));
    std::vector<double> u(basis.size);
    for (std::size_t j = 0; j < points.size(); ++j) {
        basis.eval(points[j], u);
        for (Eigen::Index i = 0; i < m; ++i)
            U(i, static_cast<Eigen::Index>(j)) = u[static_cast<std::size_t>(i)];
    }
    return U;
}

bool is_exact_projector(const KernelSpec& spec)
{
    return (spec.family() == KernelFamily::finite_rank_orthogonal ||
            spec.family() == KernelFamily::spline_projector) &&
           spec.scale() == 1.0;
}

void compute_basis_coefficients(State& st)
{
    const AxisBasis* basis = st.kernel.axis_basis();
    if (!basis)
        return;
    st.has_basis = true;
    const int dim = st.kernel.dim();
    const auto m = static_cast<Eigen::Index>(basis->size);
    const Lattice& lat = *st.lattice;

    // a(t) = \int_{-eta/2}^{eta/2} u(t + z) dz for each axis coordinate.
    const auto grid1 = QuadratureGrid(1, Point{0.0, 0.0}, Point{lat.gap() / 2.0, 0.0}, st.settings.frame_cells,
                                      st.settings.frame_order);
    std::vector<double> u(basis->size);
    auto frame_integral = [&](double t) {
        Eigen::VectorXd acc = Eigen::VectorXd::Zero(m);
        for (std::size_t q = 0; q < grid1.size(); ++q) {
            basis->eval(t + grid1.node(q)[0], u);
            const double w = grid1.weight(q);
            for (Eigen::Index i = 0; i < m; ++i)
                acc(i) += w * u[static_cast<std::size_t>(i)];
        }
        return acc;
    };

    const double factor = st.kernel.scale() * std::pow(lat.gap(), -dim / st.kernel.p());
    const Eigen::MatrixXd& M = basis->coupling;
    if (dim == 1) {
        Eigen::VectorXd acc = Eigen::VectorXd::Zero(m);
        for (std::size_t n = 0; n < lat.size(); ++n)
            if (st.coefficients[n] != 0.0)
                acc += st.coefficients[n] * frame_integral(lat.nodes()[n][0]);
        Eigen::VectorXd b = factor * (M.transpose() * acc);
        if (is_exact_projector(st.kernel))
            b = (M * (basis->gram * b)).eval();
        st.basis_coefficients.assign(b.data(), b.data() + b.size());
    } else {
        std::map<double, Eigen::VectorXd> cache;
        auto cached = [&](double t) -> const Eigen::VectorXd& {
            auto it = cache.find(t);
            if (it == cache.end())
                it = cache.emplace(t, frame_integral(t)).first;
            return it->second;
        };
        Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(m, m);
        for (std::size_t n = 0; n < lat.size(); ++n) {
            if (st.coefficients[n] == 0.0)
                continue;
            const Point& g = lat.nodes()[n];
            acc.noalias() += st.coefficients[n] * cached(g[0]) * cached(g[1]).transpose();
        }
        Eigen::MatrixXd B = factor * (M.transpose() * acc * M);
        if (is_exact_projector(st.kernel)) {
            const Eigen::MatrixXd P = M * basis->gram;
            B = (P * B * P.transpose()).eval();
        }
        st.basis_coefficients.resize(static_cast<std::size_t>(m * m));
        for (Eigen::Index i = 0; i < m; ++i)
            for (Eigen::Index j = 0; j < m; ++j)
                st.basis_coefficients[static_cast<std::size_t>(i * m + j)] = B(i, j);
    }
}

double evaluate_state(const State& st, const Point& x)
{
    if (st.has_basis) {
        const AxisBasis& basis = *st.kernel.axis_basis();
        const std::size_t m = basis.size;
        thread_local std::vector<double> u0;
        thread_local std::vector<double> u1;
        u0.resize(m);
        basis.eval(x[0], u0);
        if (st.kernel.dim() == 1) {
            double s = 0.0;
            for (std::size_t i = 0; i < m; ++i)
                s += st.basis_coefficients[i] * u0[i];
            return s;
        }
        u1.resize(m);
        basis.eval(x[1], u1);
        double s = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            if (u0[i] == 0.0)
                continue;
            double row = 0.0;
            for (std::size_t j = 0; j < m; ++j)
                row += st.basis_coefficients[i * m + j] * u1[j];
            s += u0[i] * row;
        }
        return s;
    }
    double s = 0.0;
    for (std::size_t n = 0; n < st.lattice->size(); ++n)
        if (st.coefficients[n] != 0.0)
            s += st.coefficients[n] * phi_gamma(st.kernel, *st.lattice, n, x, st.settings);
    return s;
}

std::shared_ptr<State> make_state(const KernelSpec& spec, std::shared_ptr<const Lattice> lattice,
                                  std::vector<double> coefficients, const SpaceSettings& settings,
                                  std::uint64_t seed)
{
    if (lattice->dim() != spec.dim())
        throw ContractError("synthesize: kernel and lattice dimensions differ");
    if (coefficients.size() != lattice->size())
        throw ContractError("synthesize: coefficient count " + std::to_string(coefficients.size()) +
                            " does not match node count " + std::to_string(lattice->size()));
    auto st = std::make_shared<State>(State{spec, std::move(lattice), settings, std::move(coefficients), {}, false,
                                            false, std::nullopt, seed});
    compute_basis_coefficients(*st);
    return st;
}

SynthFunction with_coefficients(const SynthFunction& f, std::vector<double> coefficients)
{
    return SynthFunction(make_state(f.kernel(), std::make_shared<const Lattice>(f.lattice()), std::move(coefficients),
                                    f.settings(), f.seed()));
}

// \int |f|^p over a planar grid for a separable expansion, streamed one grid
// row at a time instead of materializing every node value.
double planar_power_integral(const State& st, const QuadratureGrid& grid, double p)
{
    const AxisBasis& basis = *st.kernel.axis_basis();
    const auto m = static_cast<Eigen::Index>(basis.size);
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> B(
        st.basis_coefficients.data(), m, m);
    const Eigen::MatrixXd U0 = axis_values(basis, grid.axis_nodes(0));
    const Eigen::MatrixXd W = B * axis_values(basis, grid.axis_nodes(1));
    const auto w0 = grid.axis_weights(0);
    const auto w1 = grid.axis_weights(1);
    const bool square = p == 2.0;
    double total = 0.0;
    Eigen::RowVectorXd row(W.cols());
    for (Eigen::Index i = 0; i < U0.cols(); ++i) {
        row.noalias() = U0.col(i).transpose() * W;
        double acc = 0.0;
        for (Eigen::Index j = 0; j < row.size(); ++j) {
            const double v = std::abs(row(j));
            acc += w1[static_cast<std::size_t>(j)] * (square ? v * v : std::pow(v, p));
        }
        total += w0[static_cast<std::size_t>(i)] * acc;
    }
    if (!std::isfinite(total))
        throw EvaluationError("planar_power_integral: non-finite value on the quadrature grid");
    return total;
}

} // namespace

double SynthFunction::operator()(const Point& x) const
{
    return evaluate_state(*state_, x);
}

std::vector<double> SynthFunction::evaluate_on(const QuadratureGrid& grid) const
{
    const State& st = *state_;
    if (!st.has_basis || grid.dim() != st.kernel.dim())
        return sample_on(field(), grid);
    const AxisBasis& basis = *st.kernel.axis_basis();
    const auto m = static_cast<Eigen::Index>(basis.size);
    const Eigen::MatrixXd U0 = axis_values(basis, grid.axis_nodes(0));
    if (grid.dim() == 1) {
        Eigen::Map<const Eigen::VectorXd> b(st.basis_coefficients.data(), m);
        const Eigen::VectorXd v = U0.transpose() * b;
        return std::vector<double>(v.data(), v.data() + v.size());
    }
    const Eigen::MatrixXd U1 = axis_values(basis, grid.axis_nodes(1));
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> B(
        st.basis_coefficients.data(), m, m);
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> V = U0.transpose() * B * U1;
    return std::vector<double>(V.data(), V.data() + V.size());
}

ScalarField SynthFunction::field() const
{
    auto st = state_;
    return [st](const Point& x) { return evaluate_state(*st, x); };
}

const KernelSpec& SynthFunction::kernel() const noexcept { return state_->kernel; }
const Lattice& SynthFunction::lattice() const noexcept { return *state_->lattice; }
const SpaceSettings& SynthFunction::settings() const noexcept { return state_->settings; }
std::span<const double> SynthFunction::coefficients() const noexcept { return state_->coefficients; }
std::uint64_t SynthFunction::seed() const noexcept { return state_->seed; }
bool SynthFunction::normalized() const noexcept { return state_->normalized; }
std::optional<double> SynthFunction::global_norm() const noexcept { return state_->norm; }
bool SynthFunction::uses_basis() const noexcept { return state_->has_basis; }

DecayModel SynthFunction::decay_model() const
{
    const State& st = *state_;
    if (auto support = st.kernel.support_half_width())
        return CompactSupport{*support};
    const int dim = st.kernel.dim();
    const double eta = st.lattice->gap();
    double mass = 0.0;
    double reach = 0.0;
    for (std::size_t n = 0; n < st.lattice->size(); ++n) {
        if (st.coefficients[n] == 0.0)
            continue;
        mass += std::abs(st.coefficients[n]);
        reach = std::max(reach, l1_norm(st.lattice->nodes()[n], dim));
    }
    // |phi_gamma(x)| <= eta^{n/p'} C / (1 - n eta/2 + ||gamma - x||_1)^alpha and
    // ||gamma - x||_1 >= ||x||_1 - ||gamma||_1.
    PowerEnvelope env;
    env.amplitude = std::pow(eta, dim / st.kernel.p_conj()) * st.kernel.decay_amplitude() * mass;
    env.offset = 1.0 - dim * eta / 2.0 - reach;
    env.rate = st.kernel.decay_rate();
    return env;
}

GlobalNorm SynthFunction::measure_global_norm(const QuadratureSettings& quad) const
{
    const State& st = *state_;
    const int dim = st.kernel.dim();
    const double p = st.kernel.p();
    const DecayModel model = decay_model();

    double reach = 0.0;
    for (std::size_t n = 0; n < st.lattice->size(); ++n)
        if (st.coefficients[n] != 0.0)
            reach = std::max(reach, linf_norm(st.lattice->nodes()[n], dim));
    double T = std::max(st.settings.op.truncation_half_width, std::ceil(reach + st.lattice->gap()) + 2.0);
    if (const auto* support = std::get_if<CompactSupport>(&model))
        T = std::max(T, std::ceil(support->half_width));

    for (int attempt = 0; attempt < 400; ++attempt, T += 2.0) {
        double tail = 0.0;
        try {
            tail = tail_mass_bound(model, p, dim, T);
        } catch (const ContractError&) {
            continue; // envelope not yet valid on the complement
        }
        const auto grid = QuadratureGrid::cube(dim, T, quad);
        double mass = 0.0;
        if (st.has_basis && dim == 2) {
            mass = planar_power_integral(st, grid, p);
        } else {
            const auto values = evaluate_on(grid);
            std::vector<double> powered(values.size());
            for (std::size_t i = 0; i < values.size(); ++i)
                powered[i] = std::pow(std::abs(values[i]), p);
            mass = integrate_values(powered, grid);
        }
        if (tail <= st.settings.rel_tail * mass || mass == 0.0)
            return GlobalNorm{std::pow(mass, 1.0 / p), tail, T};
    }
    throw InfeasibleError("measure_global_norm: tail bound never met the tolerance");
}

GlobalNorm SynthFunction::measure_global_norm() const
{
    const State& st = *state_;
    if (!(st.has_basis && st.kernel.p() == 2.0))
        return measure_global_norm(st.settings.op.quad);
    // Exact L^2 norm from the axis Gram matrix; no truncation involved.
    const AxisBasis& basis = *st.kernel.axis_basis();
    const auto m = static_cast<Eigen::Index>(basis.size);
    const Eigen::MatrixXd& G = basis.gram;
    double sq = 0.0;
    if (st.kernel.dim() == 1) {
        Eigen::Map<const Eigen::VectorXd> b(st.basis_coefficients.data(), m);
        sq = b.dot(G * b);
    } else {
        Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> B(
            st.basis_coefficients.data(), m, m);
        sq = (B.cwiseProduct(G * B * G)).sum();
    }
    return GlobalNorm{std::sqrt(std::max(sq, 0.0)), 0.0, std::numeric_limits<double>::infinity()};
}

nlohmann::json SynthFunction::to_json() const
{
    const State& st = *state_;
    KernelParams params = st.kernel.params();
    params.decay_amplitude = st.kernel.decay_amplitude();
    nlohmann::json j;
    j["kernel"] = kernel_params_to_json(params);
    j["kernel"]["family"] = std::string(to_string(st.kernel.family()));
    j["lattice"] = {{"dim", st.lattice->dim()}, {"gap", st.lattice->gap()}, {"half_width", st.lattice->half_width()}};
    j["coefficients"] = st.coefficients;
    j["seed"] = st.seed;
    j["normalized"] = st.normalized;
    if (st.norm)
        j["global_norm"] = *st.norm;
    return j;
}

namespace {

SynthFunction finish(std::shared_ptr<State> st, bool normalize)
{
    if (!normalize)
        return SynthFunction(std::move(st));
    if (std::all_of(st->coefficients.begin(), st->coefficients.end(), [](double c) { return c == 0.0; }))
        throw DegenerateInputError("synthesize: cannot normalize all-zero coefficients");
    const GlobalNorm g = SynthFunction(st).measure_global_norm();
    if (!(g.value > 0.0) || !std::isfinite(g.value))
        throw DegenerateInputError("synthesize: synthesized function has zero norm");
    const double inv = 1.0 / g.value;
    for (double& c : st->coefficients)
        c *= inv;
    for (double& b : st->basis_coefficients)
        b *= inv;
    st->normalized = true;
    st->norm = 1.0;
    return SynthFunction(std::move(st));
}

} // namespace

SynthFunction synthesize(const KernelSpec& spec, const Lattice& lattice, std::span<const double> coefficients,
                         bool normalize, const SpaceSettings& settings, std::uint64_t seed)
{
    auto st = make_state(spec, std::make_shared<const Lattice>(lattice),
                         std::vector<double>(coefficients.begin(), coefficients.end()), settings, seed);
    return finish(std::move(st), normalize);
}

SynthFunction truncate_to_box(const SynthFunction& f, double N)
{
    if (!(N > 0.0))
        throw ContractError("truncate_to_box: N must be positive");
    std::vector<double> c(f.coefficients().begin(), f.coefficients().end());
    for (std::size_t n = 0; n < c.size(); ++n)
        if (!f.lattice().inside(n, N / 2.0))
            c[n] = 0.0;
    return with_coefficients(f, std::move(c));
}

SynthFunction truncation_residual(const SynthFunction& f, double N)
{
    if (!(N > 0.0))
        throw ContractError("truncation_residual: N must be positive");
    std::vector<double> c(f.coefficients().begin(), f.coefficients().end());
    for (std::size_t n = 0; n < c.size(); ++n)
        if (f.lattice().inside(n, N / 2.0))
            c[n] = 0.0;
    return with_coefficients(f, std::move(c));
}

double lp_norm_cube(const SynthFunction& f, double R)
{
    if (!(R > 0.0))
        throw ContractError("lp_norm_cube: R must be positive");
    const auto grid = QuadratureGrid::cube(f.dim(), R / 2.0, f.settings().op.quad);
    return lp_norm_values(f.evaluate_on(grid), f.p(), grid);
}

ConcentrationResult concentration(const SynthFunction& f, double R, double delta)
{
    if (!(delta > 0.0 && delta < 1.0))
        throw ContractError("concentration: delta must lie in (0, 1)");
    if (!f.normalized())
        throw ContractError("concentration: function must be normalized");
    const double inside = std::pow(lp_norm_cube(f, R), f.p());
    ConcentrationResult out;
    out.delta_measured = std::clamp(1.0 - inside / std::pow(*f.global_norm(), f.p()), 0.0, 1.0);
    out.in_class = out.delta_measured <= delta;
    return out;
}

RandomMember sample_random_member(const KernelSpec& spec, const Lattice& lattice, double R, double delta,
                                  std::uint64_t seed, const SpaceSettings& settings)
{
    std::vector<std::size_t> inside;
    for (std::size_t n = 0; n < lattice.size(); ++n)
        if (lattice.inside(n, R / 2.0))
            inside.push_back(n);
    if (inside.empty())
        throw ContractError("sample_random_member: no lattice node inside C_R");

    auto shared_lattice = std::make_shared<const Lattice>(lattice);
    constexpr int max_rejections = 1000;
    for (int attempt = 0; attempt < max_rejections; ++attempt) {
        auto rng = CounterRng::substream(seed, {0x5eedULL, static_cast<std::uint64_t>(attempt)});
        std::normal_distribution<double> normal(0.0, 1.0);
        std::vector<double> c(lattice.size(), 0.0);
        for (std::size_t n : inside)
            c[n] = normal(rng);
        SynthFunction f = finish(make_state(spec, shared_lattice, std::move(c), settings, seed), true);
        if (concentration(f, R, delta).in_class)
            return RandomMember{std::move(f), attempt};
    }
    throw InfeasibleError("sample_random_member: " + std::to_string(max_rejections) +
                          " consecutive draws missed V(R, delta); delta = " + std::to_string(delta) +
                          " is too small for this kernel, lattice and R = " + std::to_string(R));
}

double linf_norm_CR(const SynthFunction& f, double R, int points_per_axis)
{
    double best = 0.0;
    for (const Point& x : dense_cube_points(f.dim(), R, points_per_axis))
        best = std::max(best, std::abs(f(x)));
    return best;
}

double linf_norm_CR(const SynthFunction& f, double R)
{
    return linf_norm_CR(f, R, f.settings().op.dense_points);
}

double linf_distance_CR(const SynthFunction& f, const SynthFunction& g, double R, int points_per_axis)
{
    double best = 0.0;
    for (const Point& x : dense_cube_points(f.dim(), R, points_per_axis))
        best = std::max(best, std::abs(f(x) - g(x)));
    return best;
}

double empirical_frame_bound(const KernelSpec& spec, const Lattice& lattice, int trials, std::uint64_t seed,
                             double safety, const SpaceSettings& settings)
{
    if (trials < 1)
        throw ContractError("empirical_frame_bound: need at least one trial");
    auto shared_lattice = std::make_shared<const Lattice>(lattice);
    const double p = spec.p();
    double worst = 0.0;
    for (int t = 0; t < trials; ++t) {
        auto rng = CounterRng::substream(seed, {0xb0b0ULL, static_cast<std::uint64_t>(t)});
        std::normal_distribution<double> normal(0.0, 1.0);
        std::vector<double> c(lattice.size());
        double coeff_mass = 0.0;
        for (double& v : c) {
            v = normal(rng);
            coeff_mass += std::pow(std::abs(v), p);
        }
        const SynthFunction f(make_state(spec, shared_lattice, std::move(c), settings, seed));
        const double norm = f.measure_global_norm().value;
        if (norm > 0.0)
            worst = std::max(worst, coeff_mass / std::pow(norm, p));
    }
    if (!(worst > 0.0))
        throw DegenerateInputError("empirical_frame_bound: every synthesized function vanished");
    return safety * worst;
}

nlohmann::json kernel_params_to_json(const KernelParams& params)
{
    nlohmann::json j = {
        {"name", params.name},   {"dim", params.dim},
        {"p", params.p},         {"alpha", params.alpha},
        {"rank", params.rank},   {"width", params.width},
        {"spline_extent", params.spline_extent}, {"norm_sq", params.norm_sq},
        {"scale", params.scale},
    };
    if (params.decay_amplitude)
        j["decay_amplitude"] = *params.decay_amplitude;
    return j;
}

KernelParams kernel_params_from_json(const nlohmann::json& j)
{
    KernelParams p;
    p.name = j.at("name").get<std::string>();
    p.dim = j.at("dim").get<int>();
    p.p = j.at("p").get<double>();
    p.alpha = j.at("alpha").get<double>();
    p.rank = j.value("rank", p.rank);
    p.width = j.value("width", p.width);
    p.spline_extent = j.value("spline_extent", p.spline_extent);
    p.norm_sq = j.value("norm_sq", p.norm_sq);
    p.scale = j.value("scale", p.scale);
    if (j.contains("decay_amplitude"))
        p.decay_amplitude = j.at("decay_amplitude").get<double>();
    return p;
}

SynthFunction synth_from_json(const nlohmann::json& j, const SpaceSettings& settings)
{
    const KernelSpec spec = make_kernel(kernel_params_from_json(j.at("kernel")));
    const auto& lj = j.at("lattice");
    auto lattice = std::make_shared<const Lattice>(
        Lattice::uniform(lj.at("dim").get<int>(), lj.at("gap").get<double>(), lj.at("half_width").get<double>()));
    auto st = make_state(spec, lattice, j.at("coefficients").get<std::vector<double>>(), settings,
                         j.value("seed", std::uint64_t{0}));
    if (j.value("normalized", false)) {
        st->normalized = true;
        st->norm = j.value("global_norm", 1.0);
    }
    return SynthFunction(std::move(st));
}

} // namespace rks
