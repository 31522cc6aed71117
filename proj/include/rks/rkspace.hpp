#pragma once

// The space V = Range(T): the lattice of frame centres, the frame functions
// phi_gamma(x) = eta^{-n/p} \int_{[-eta/2, eta/2]^n} K(gamma + z, x) dz,
// finite expansions f = sum_gamma c_gamma phi_gamma, and membership in the
// concentrated class V(R, delta).

#include "rks/kernels.hpp"
#include "rks/numerics.hpp"

#include <json.hpp>

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace rks {

// Relatively separated node set: pairwise ||gamma - gamma'||_1 >= gap, gap < 2/n.
class Lattice {
public:
    // gap * Z^n intersected with [-half_width, half_width]^n.
    static Lattice uniform(int dim, double gap, double half_width);

    // Arbitrary node set; validates the separation and the gap bound.
    Lattice(int dim, double gap, double half_width, std::vector<Point> nodes);

    int dim() const noexcept { return dim_; }
    double gap() const noexcept { return gap_; }
    double half_width() const noexcept { return half_width_; }
    std::span<const Point> nodes() const noexcept { return nodes_; }
    std::size_t size() const noexcept { return nodes_.size(); }

    // N_0: the largest number of nodes in a closed unit cell k + [-1/2, 1/2]^n, k in Z^n.
    int max_cell_count() const;

    bool inside(std::size_t node, double half_extent) const noexcept;

private:
    int dim_;
    double gap_;
    double half_width_;
    std::vector<Point> nodes_;
};

struct SpaceSettings {
    OperatorSettings op{};
    int frame_cells = 2;  // quadrature cells per axis on C_eta
    int frame_order = 8;
    double rel_tail = 1e-3;
};

double phi_gamma(const KernelSpec& spec, const Lattice& lattice, std::size_t node, const Point& x,
                 const SpaceSettings& settings = {});

struct ConcentrationResult {
    double delta_measured = 0.0;
    bool in_class = false;
};

// f = sum_gamma c_gamma phi_gamma. Immutable; cheap to copy.
class SynthFunction {
public:
    double operator()(const Point& x) const;
    // Values at every node of `grid` (same order as QuadratureGrid::node).
    std::vector<double> evaluate_on(const QuadratureGrid& grid) const;
    ScalarField field() const;

    const KernelSpec& kernel() const noexcept;
    const Lattice& lattice() const noexcept;
    const SpaceSettings& settings() const noexcept;
    std::span<const double> coefficients() const noexcept;
    std::uint64_t seed() const noexcept;
    int dim() const noexcept { return kernel().dim(); }
    double p() const noexcept { return kernel().p(); }

    bool normalized() const noexcept;
    // Global p-norm recorded at normalization (1 after normalize).
    std::optional<double> global_norm() const noexcept;

    // Pointwise envelope valid for every x (compact support for spline kernels).
    DecayModel decay_model() const;
    // ||f||_{L^p(R^n)} by quadrature, with the truncation box chosen so the
    // closed-form tail bound is below rel_tail of the truncated mass.
    GlobalNorm measure_global_norm(const QuadratureSettings& quad) const;
    // As above with the configured rule; for p = 2 and a separable kernel the
    // norm comes from the axis Gram matrix instead (tail 0, box infinite).
    GlobalNorm measure_global_norm() const;

    // True when evaluation goes through the kernel's separable factorization.
    bool uses_basis() const noexcept;

    nlohmann::json to_json() const;

    struct State;
    explicit SynthFunction(std::shared_ptr<const State> state) : state_(std::move(state)) {}

private:
    std::shared_ptr<const State> state_;
};

// Builds f from explicit coefficients. With normalize, rescales so that
// ||f||_{L^p(R^n)} = 1; all-zero coefficients then raise DegenerateInputError.
// For the exact projector families (finite-rank, spline) the expansion is
// additionally passed once through T so that f lies in Range(T) exactly.
SynthFunction synthesize(const KernelSpec& spec, const Lattice& lattice, std::span<const double> coefficients,
                         bool normalize, const SpaceSettings& settings = {}, std::uint64_t seed = 0);

// Keeps only coefficients with gamma in [-N/2, N/2]^n; not renormalized.
SynthFunction truncate_to_box(const SynthFunction& f, double N);
// The complementary part f - f_N, synthesized directly from the dropped coefficients.
SynthFunction truncation_residual(const SynthFunction& f, double N);

double lp_norm_cube(const SynthFunction& f, double R);
ConcentrationResult concentration(const SynthFunction& f, double R, double delta);

struct RandomMember {
    SynthFunction function;
    int rejections = 0;
};

// i.i.d. standard normal coefficients on nodes with ||gamma||_inf <= R/2,
// normalized and redrawn (fresh substream) until concentrated.
RandomMember sample_random_member(const KernelSpec& spec, const Lattice& lattice, double R, double delta,
                                  std::uint64_t seed, const SpaceSettings& settings = {});

// max |f| over the dense grid used by k_sup.
double linf_norm_CR(const SynthFunction& f, double R, int points_per_axis);
double linf_norm_CR(const SynthFunction& f, double R);
// max |f - g| over the same grid.
double linf_distance_CR(const SynthFunction& f, const SynthFunction& g, double R, int points_per_axis);

// Surrogate upper frame constant: safety * max over seeded Gaussian coefficient
// vectors on the full lattice of sum |c|^p / ||sum c phi||^p.
double empirical_frame_bound(const KernelSpec& spec, const Lattice& lattice, int trials, std::uint64_t seed,
                             double safety = 2.0, const SpaceSettings& settings = {});

nlohmann::json kernel_params_to_json(const KernelParams& params);
KernelParams kernel_params_from_json(const nlohmann::json& j);
SynthFunction synth_from_json(const nlohmann::json& j, const SpaceSettings& settings = {});

} // namespace rks
