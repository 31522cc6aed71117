#pragma once

// Symmetric integral kernels K(x, y) on R^n, the operator Tf = \int K(., y) f(y) dy,
// and numerical diagnostics for the standing assumptions on K: idempotency,
// power-law off-diagonal decay and vanishing oscillation.

#include "rks/numerics.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rks {

enum class KernelFamily {
    finite_rank_orthogonal, // sum of products of orthonormal Hermite functions
    spline_projector,       // cubic B-splines against their Gram-dual
    rank_one_gaussian,      // g(x) g(y), idempotent only when ||g||_2 = 1
    envelope,               // C / (1 + ||x - y||_1)^alpha, shift invariant
    zero,
};

std::string_view to_string(KernelFamily family) noexcept;

// Catalog selection, as read from a config file.
struct KernelParams {
    std::string name = "hermite"; // hermite | spline | gaussian_rank1 | envelope | zero
    int dim = 1;
    double p = 2.0;
    double alpha = 4.0;
    int rank = 5;               // hermite: functions per axis
    double width = 1.0;         // hermite / gaussian_rank1 length scale
    int spline_extent = 10;     // spline: lattice {-L, ..., L} per axis
    double norm_sq = 2.0;       // gaussian_rank1: ||g||_2^2
    double scale = 1.0;         // overall factor multiplying K
    std::optional<double> decay_amplitude; // declared C; fitted when absent
};

// One-dimensional factor of a separable kernel:
//   K_1(s, t) = u(s)^T M u(t),   K(x, y) = scale * prod_a K_1(x_a, y_a).
struct AxisBasis {
    std::size_t size = 0;
    std::function<void(double, std::span<double>)> eval;
    Eigen::MatrixXd coupling; // M
    Eigen::MatrixXd gram;     // <u_i, u_j> in L^2(R)
    double support_half_width = std::numeric_limits<double>::infinity();
};

using KernelEvaluator = std::function<double(const Point&, const Point&)>;

class KernelSpec {
public:
    struct Parts {
        KernelParams params;
        KernelFamily family = KernelFamily::zero;
        KernelEvaluator eval;
        std::shared_ptr<const AxisBasis> axis_basis; // null when not separable
        double decay_amplitude = 1.0;
        double reference_half_width = 8.0;
        std::optional<double> support_half_width;
    };

    // Validates 1 < p < inf, C > 0 and alpha > n/p' + n + 1.
    explicit KernelSpec(Parts parts);

    double operator()(const Point& x, const Point& y) const { return data_->eval(x, y); }

    int dim() const noexcept { return data_->params.dim; }
    double p() const noexcept { return data_->params.p; }
    double p_conj() const noexcept { return data_->params.p / (data_->params.p - 1.0); }
    double decay_amplitude() const noexcept { return data_->decay_amplitude; }
    double decay_rate() const noexcept { return data_->params.alpha; }
    KernelFamily family() const noexcept { return data_->family; }
    const KernelParams& params() const noexcept { return data_->params; }
    double scale() const noexcept { return data_->params.scale; }

    // Box [-h, h]^n over which the decay constant is fitted and checked.
    double reference_half_width() const noexcept { return data_->reference_half_width; }
    // K(x, .) vanishes outside [-h, h]^n for every x, when set.
    std::optional<double> support_half_width() const noexcept { return data_->support_half_width; }
    const AxisBasis* axis_basis() const noexcept { return data_->axis_basis.get(); }

    // Decay model for y -> K(x, y).
    DecayModel row_decay(const Point& x) const;

    KernelSpec scaled(double c) const;
    KernelSpec with_decay_amplitude(double C) const;

private:
    std::shared_ptr<const Parts> data_;
};

KernelSpec make_kernel(const KernelParams& params);

// Orthonormal Hermite functions h_0..h_{m-1} at t (unit width).
void hermite_functions(double t, std::span<double> out);
// Centred cubic B-spline.
double cubic_bspline(double t) noexcept;

// C = max over a dense grid (refined by local search) of |K(x,y)| (1+||x-y||_1)^alpha,
// inflated by 1%.
double fit_decay_amplitude(const KernelEvaluator& kernel, int dim, double alpha, double half_width);

struct OperatorSettings {
    QuadratureSettings quad{};
    double truncation_half_width = 12.0;
    int dense_points = 129; // points per axis of the sup grid on C_R
};

// Tf(x) by quadrature over [-T, T]^n.
double apply_T(const KernelSpec& spec, const ScalarField& f, const Point& x,
               const OperatorSettings& settings = {});

// Tf as a field; f is sampled once on the quadrature grid.
ScalarField apply_T(const KernelSpec& spec, const ScalarField& f, const OperatorSettings& settings = {});

// max over fields of ||T(Tf) - Tf|| / ||Tf|| in L^p(C_R). Fields with
// ||Tf|| < 1e-12 are skipped; if all are, DegenerateInputError.
double idempotency_defect(const KernelSpec& spec, std::span<const ScalarField> fields, double R,
                          const OperatorSettings& settings = {});

struct KernelConstants {
    double k = 0.0; // sup over C_R of ||K(x, .)||_{L^p'}
    double R = 0.0;
    int points_per_axis = 0;
    Point argmax{0.0, 0.0};
};

// ||K(x, .)||_{L^p'(R^n)}, truncated where the row decay bound falls below
// 1e-3 of the truncated mass.
GlobalNorm kernel_row_norm(const KernelSpec& spec, const Point& x, const OperatorSettings& settings = {});

KernelConstants k_sup(const KernelSpec& spec, double R, const OperatorSettings& settings = {});
// The same supremum over an explicit point list.
KernelConstants k_sup_over(const KernelSpec& spec, std::span<const Point> points,
                           const OperatorSettings& settings = {});

struct OscillationSettings {
    double half_width = 0.0;       // L^1 domain [-h, h]^n; 0 selects the kernel's reference box
    QuadratureSettings quad{8, 0.5};
    int shift_points = 33;         // z grid per axis
    int perturbation_points = 5;   // per axis of [-eps, eps]
};

OscillationSettings default_oscillation_settings(int dim);

// Estimate of || sup_z |osc_eps(K)(. + z, z)| ||_{L^1}. eps = 0 yields 0.
double oscillation_modulus(const KernelSpec& spec, double eps, const OscillationSettings& settings);

struct DecayCheck {
    bool holds = false;
    double worst_ratio = 0.0;
    Point worst_x{0.0, 0.0};
    Point worst_y{0.0, 0.0};
};

// Worst |K(x,y)| (1+||x-y||_1)^alpha / C over seeded random pairs in the reference box.
DecayCheck decay_envelope_check(const KernelSpec& spec, int trial_points, std::uint64_t seed);

} // namespace rks
