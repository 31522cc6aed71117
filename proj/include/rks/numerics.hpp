#pragma once

// Tensor-product composite Gauss-Legendre quadrature on boxes in R^n
// (n = 1 or 2), and the L^p norms built on it.

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <variant>
#include <vector>

namespace rks {

// A point in R^n, n <= 2. For n = 1 the second coordinate is ignored and kept 0.
using Point = std::array<double, 2>;
using ScalarField = std::function<double(const Point&)>;

inline constexpr int kMaxDim = 2;

double l1_norm(const Point& x, int dim) noexcept;
double linf_norm(const Point& x, int dim) noexcept;

// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};
const GaussRule& gauss_legendre(int order);

struct QuadratureSettings {
    int order = 8;           // Gauss-Legendre points per cell
    double cell_width = 0.25; // largest admissible cell edge
};

class QuadratureGrid {
public:
    QuadratureGrid(int dim, Point center, Point half_width, int cells_per_axis, int order = 8);

    // Box centred at `center` with cells no wider than settings.cell_width.
    static QuadratureGrid covering(int dim, Point center, Point half_width,
                                   const QuadratureSettings& settings = {});
    // The cube [-h, h]^n.
    static QuadratureGrid cube(int dim, double half_width, const QuadratureSettings& settings = {});

    int dim() const noexcept { return dim_; }
    int order() const noexcept { return order_; }
    int cells_per_axis() const noexcept { return cells_; }
    std::size_t nodes_per_axis() const noexcept { return axis_nodes_[0].size(); }
    std::size_t size() const noexcept;
    const Point& center() const noexcept { return center_; }
    const Point& half_width() const noexcept { return half_width_; }
    double volume() const noexcept;

    std::span<const double> axis_nodes(int axis) const { return axis_nodes_[axis]; }
    std::span<const double> axis_weights(int axis) const { return axis_weights_[axis]; }

    Point node(std::size_t i) const noexcept;
    double weight(std::size_t i) const noexcept;

    // Same box, twice the cells per axis.
    QuadratureGrid refined() const;

private:
    int dim_;
    int order_;
    int cells_;
    Point center_;
    Point half_width_;
    std::array<std::vector<double>, kMaxDim> axis_nodes_;
    std::array<std::vector<double>, kMaxDim> axis_weights_;
};

// Samples f at every node (row-major, last axis fastest).
std::vector<double> sample_on(const ScalarField& f, const QuadratureGrid& grid);

// Weighted sum of pre-sampled node values. Throws EvaluationError naming the
// first node holding a non-finite value.
double integrate_values(std::span<const double> values, const QuadratureGrid& grid);
double integrate_box(const ScalarField& f, const QuadratureGrid& grid);

double lp_norm_values(std::span<const double> values, double p, const QuadratureGrid& grid);
double lp_norm_box(const ScalarField& f, double p, const QuadratureGrid& grid);

// |f(x)| <= amplitude / (offset + ||x - center||_1)^rate wherever the
// denominator base is positive. `offset` may be negative.
struct PowerEnvelope {
    double amplitude = 1.0;
    double offset = 1.0;
    double rate = 4.0;
    Point center{0.0, 0.0};
};

// f vanishes outside [-half_width, half_width]^n.
struct CompactSupport {
    double half_width = 0.0;
};

using DecayModel = std::variant<CompactSupport, PowerEnvelope>;

// Closed-form upper bound on the integral of |f|^p over the complement of
// [-T, T]^n given the decay model.
double tail_mass_bound(const DecayModel& model, double p, int dim, double truncation_half_width);

struct GlobalNorm {
    double value = 0.0;          // (integral over [-T,T]^n of |f|^p)^(1/p)
    double tail_bound = 0.0;     // bound on the omitted integral of |f|^p
    double truncation_half_width = 0.0;
};

// Truncated L^p(R^n) norm with an analytic bound on the omitted tail mass.
// A decay model is mandatory: without one the tail cannot be controlled.
GlobalNorm lp_norm_global(const ScalarField& f, double p, int dim, double truncation_half_width,
                          const std::optional<DecayModel>& model,
                          const QuadratureSettings& settings = {});

// Smallest truncation box, starting at `initial_half_width` and growing in
// unit steps, whose tail bound is below rel_tail * (truncated mass).
double choose_truncation(const DecayModel& model, double p, int dim, double initial_half_width,
                         double truncated_mass, double rel_tail = 1e-3);

// Equally spaced points (endpoints included) on [-R/2, R/2]^n.
std::vector<Point> dense_cube_points(int dim, double R, int points_per_axis);

} // namespace rks
