#include "rks/numerics.hpp"

#include "rks/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>
#include <string>

namespace rks {

double l1_norm(const Point& x, int dim) noexcept
{
    double s = 0.0;
    for (int a = 0; a < dim; ++a)
        s += std::abs(x[a]);
    return s;
}

double linf_norm(const Point& x, int dim) noexcept
{
    double s = 0.0;
    for (int a = 0; a < dim; ++a)
        s = std::max(s, std::abs(x[a]));
    return s;
}

namespace {

GaussRule compute_gauss_legendre(int order)
{
    GaussRule rule;
    rule.nodes.resize(order);
    rule.weights.resize(order);
    const int half = (order + 1) / 2;
    for (int i = 0; i < half; ++i) {
        // Chebyshev-like initial guess, then Newton on P_order.
        double x = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
        double dp = 1.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0;
            double p1 = x;
            for (int k = 2; k <= order; ++k) {
                const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = pk;
            }
            if (order == 1)
                p0 = 1.0;
            dp = order * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16)
                break;
        }
        // Recompute the derivative at the converged root.
        double p0 = 1.0;
        double p1 = x;
        for (int k = 2; k <= order; ++k) {
            const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = pk;
        }
        dp = (order == 1) ? 1.0 : order * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.nodes[order - 1 - i] = x;
        rule.weights[i] = w;
        rule.weights[order - 1 - i] = w;
    }
    if (order % 2 == 1)
        rule.nodes[order / 2] = 0.0;
    return rule;
}

std::string describe_node(const Point& x, int dim)
{
    std::ostringstream os;
    os.precision(17);
    os << '(' << x[0];
    if (dim == 2)
        os << ", " << x[1];
    os << ')';
    return os.str();
}

} // namespace

const GaussRule& gauss_legendre(int order)
{
    if (order < 1 || order > 128)
        throw ContractError("gauss_legendre: order must lie in [1, 128]");
    static std::mutex mutex;
    static std::map<int, GaussRule> cache;
    std::lock_guard lock(mutex);
    auto it = cache.find(order);
    if (it == cache.end())
        it = cache.emplace(order, compute_gauss_legendre(order)).first;
    return it->second;
}

QuadratureGrid::QuadratureGrid(int dim, Point center, Point half_width, int cells_per_axis, int order)
    : dim_(dim), order_(order), cells_(cells_per_axis), center_(center), half_width_(half_width)
{
    if (dim < 1 || dim > kMaxDim)
        throw ContractError("QuadratureGrid: dimension must be 1 or 2");
    if (cells_per_axis < 1 || order < 1 || cells_per_axis * order < 2)
        throw ContractError("QuadratureGrid: need at least 2 nodes per axis");
    for (int a = 0; a < dim; ++a)
        if (!(half_width[a] > 0.0) || !std::isfinite(half_width[a]))
            throw ContractError("QuadratureGrid: half-widths must be strictly positive");
    if (dim == 1) {
        center_[1] = 0.0;
        half_width_[1] = 0.0;
    }

    const GaussRule& rule = gauss_legendre(order);
    for (int a = 0; a < dim; ++a) {
        const double lo = center[a] - half_width[a];
        const double h = 2.0 * half_width[a] / cells_per_axis;
        auto& nodes = axis_nodes_[a];
        auto& weights = axis_weights_[a];
        nodes.reserve(static_cast<std::size_t>(cells_per_axis) * order);
        weights.reserve(nodes.capacity());
        for (int c = 0; c < cells_per_axis; ++c) {
            const double mid = lo + (c + 0.5) * h;
            for (int q = 0; q < order; ++q) {
                nodes.push_back(mid + 0.5 * h * rule.nodes[q]);
                weights.push_back(0.5 * h * rule.weights[q]);
            }
        }
    }
}

QuadratureGrid QuadratureGrid::covering(int dim, Point center, Point half_width,
                                        const QuadratureSettings& settings)
{
    if (!(settings.cell_width > 0.0))
        throw ContractError("QuadratureGrid: cell width must be positive");
    double widest = half_width[0];
    if (dim == 2)
        widest = std::max(widest, half_width[1]);
    const int cells = std::max(1, static_cast<int>(std::ceil(2.0 * widest / settings.cell_width - 1e-9)));
    return QuadratureGrid(dim, center, half_width, cells, settings.order);
}

QuadratureGrid QuadratureGrid::cube(int dim, double half_width, const QuadratureSettings& settings)
{
    return covering(dim, Point{0.0, 0.0}, Point{half_width, half_width}, settings);
}

std::size_t QuadratureGrid::size() const noexcept
{
    std::size_t n = axis_nodes_[0].size();
    if (dim_ == 2)
        n *= axis_nodes_[1].size();
    return n;
}

double QuadratureGrid::volume() const noexcept
{
    double v = 2.0 * half_width_[0];
    if (dim_ == 2)
        v *= 2.0 * half_width_[1];
    return v;
}

Point QuadratureGrid::node(std::size_t i) const noexcept
{
    if (dim_ == 1)
        return {axis_nodes_[0][i], 0.0};
    const std::size_t m = axis_nodes_[1].size();
    return {axis_nodes_[0][i / m], axis_nodes_[1][i % m]};
}

double QuadratureGrid::weight(std::size_t i) const noexcept
{
    if (dim_ == 1)
        return axis_weights_[0][i];
    const std::size_t m = axis_weights_[1].size();
    return axis_weights_[0][i / m] * axis_weights_[1][i % m];
}

QuadratureGrid QuadratureGrid::refined() const
{
    return QuadratureGrid(dim_, center_, half_width_, 2 * cells_, order_);
}

std::vector<double> sample_on(const ScalarField& f, const QuadratureGrid& grid)
{
    std::vector<double> values(grid.size());
    for (std::size_t i = 0; i < values.size(); ++i)
        values[i] = f(grid.node(i));
    return values;
}

double integrate_values(std::span<const double> values, const QuadratureGrid& grid)
{
    if (values.size() != grid.size())
        throw ContractError("integrate_values: value count does not match the grid");
    double sum = 0.0;
    double comp = 0.0; // Neumaier compensation
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i]))
            throw EvaluationError("non-finite integrand value at node " + describe_node(grid.node(i), grid.dim()));
        const double term = grid.weight(i) * values[i];
        const double t = sum + term;
        if (std::abs(sum) >= std::abs(term))
            comp += (sum - t) + term;
        else
            comp += (term - t) + sum;
        sum = t;
    }
    return sum + comp;
}

double integrate_box(const ScalarField& f, const QuadratureGrid& grid)
{
    return integrate_values(sample_on(f, grid), grid);
}

double lp_norm_values(std::span<const double> values, double p, const QuadratureGrid& grid)
{
    if (!(p >= 1.0) || !std::isfinite(p))
        throw ContractError("lp_norm: p must be finite and >= 1");
    // Scaled by the largest magnitude so tiny values do not underflow when raised to p.
    double scale = 0.0;
    for (double v : values)
        scale = std::max(scale, std::abs(v));
    if (scale == 0.0)
        return 0.0;
    if (!std::isfinite(scale))
        scale = 1.0; // integrate_values reports the offending node
    std::vector<double> powered(values.size());
    for (std::size_t i = 0; i < values.size(); ++i)
        powered[i] = std::pow(std::abs(values[i]) / scale, p);
    return scale * std::pow(integrate_values(powered, grid), 1.0 / p);
}

double lp_norm_box(const ScalarField& f, double p, const QuadratureGrid& grid)
{
    return lp_norm_values(sample_on(f, grid), p, grid);
}

namespace {

// Base of the envelope at the nearest point of the complement; must be > 0.
double envelope_clearance(const PowerEnvelope& env, int dim, double T)
{
    double nearest = T - std::abs(env.center[0]);
    if (dim == 2)
        nearest = std::min(nearest, T - std::abs(env.center[1]));
    return env.offset + nearest;
}

} // namespace

double tail_mass_bound(const DecayModel& model, double p, int dim, double T)
{
    if (!(T > 0.0))
        throw ContractError("tail_mass_bound: truncation half-width must be positive");
    if (const auto* support = std::get_if<CompactSupport>(&model)) {
        if (support->half_width <= T * (1.0 + 1e-12))
            return 0.0;
        throw ContractError("tail_mass_bound: support extends beyond the truncation box");
    }

    const auto& env = std::get<PowerEnvelope>(model);
    const double beta = env.rate * p;
    if (!(beta > dim))
        throw ContractError("tail_mass_bound: envelope decays too slowly to be integrable");
    for (int a = 0; a < dim; ++a)
        if (std::abs(env.center[a]) >= T)
            throw ContractError("tail_mass_bound: envelope centre lies outside the truncation box");
    if (!(envelope_clearance(env, dim, T) > 0.0))
        throw ContractError("tail_mass_bound: envelope base is not positive on the complement");

    const double scale = std::pow(env.amplitude, p);
    const double s = env.offset;
    if (dim == 1) {
        const double right = s + T - env.center[0];
        const double left = s + T + env.center[0];
        return scale * (std::pow(right, 1.0 - beta) + std::pow(left, 1.0 - beta)) / (beta - 1.0);
    }

    // Quadrant decomposition around the centre; in each quadrant the box is
    // [0,a] x [0,b] and the complement integral of (s+u+v)^-beta is
    // F(0,b) + F(a,0) - F(a,b) with F = (s+u+v)^(2-beta) / ((beta-1)(beta-2)).
    const double denom = (beta - 1.0) * (beta - 2.0);
    auto F = [&](double u, double v) { return std::pow(s + u + v, 2.0 - beta) / denom; };
    double total = 0.0;
    for (int sx : {-1, 1}) {
        for (int sy : {-1, 1}) {
            const double a = T - sx * env.center[0];
            const double b = T - sy * env.center[1];
            total += F(0.0, b) + F(a, 0.0) - F(a, b);
        }
    }
    return scale * total;
}

GlobalNorm lp_norm_global(const ScalarField& f, double p, int dim, double T,
                          const std::optional<DecayModel>& model, const QuadratureSettings& settings)
{
    if (!model)
        throw ContractError("lp_norm_global: a decay model is required to bound the tail");
    GlobalNorm out;
    out.truncation_half_width = T;
    out.tail_bound = tail_mass_bound(*model, p, dim, T);
    out.value = lp_norm_box(f, p, QuadratureGrid::cube(dim, T, settings));
    return out;
}

double choose_truncation(const DecayModel& model, double p, int dim, double initial,
                         double truncated_mass, double rel_tail)
{
    double T = std::max(1.0, std::ceil(initial));
    if (const auto* support = std::get_if<CompactSupport>(&model))
        return std::max(T, std::ceil(support->half_width));

    const auto& env = std::get<PowerEnvelope>(model);
    const double centre_reach = std::max(std::abs(env.center[0]), dim == 2 ? std::abs(env.center[1]) : 0.0);
    while (T <= centre_reach || envelope_clearance(env, dim, T) <= 0.0)
        T += 1.0;
    for (int step = 0; step < 100000; ++step, T += 1.0) {
        if (tail_mass_bound(model, p, dim, T) <= rel_tail * truncated_mass)
            return T;
    }
    throw InfeasibleError("choose_truncation: no truncation box meets the tail tolerance");
}

std::vector<Point> dense_cube_points(int dim, double R, int points_per_axis)
{
    if (points_per_axis < 2)
        throw ContractError("dense_cube_points: need at least 2 points per axis");
    std::vector<double> axis(points_per_axis);
    for (int i = 0; i < points_per_axis; ++i)
        axis[i] = -R / 2.0 + R * i / (points_per_axis - 1);
    std::vector<Point> pts;
    if (dim == 1) {
        for (double x : axis)
            pts.push_back({x, 0.0});
    } else {
        for (double x : axis)
            for (double y : axis)
                pts.push_back({x, y});
    }
    return pts;
}

} // namespace rks
