#pragma once

// Closed-form constants of the random sampling argument: truncation radius,
// the sup-norm constant D, covering dimensions and counts, Bernstein's tail,
// the chaining constants and the final probability bound.
//
// Every quantity that can overflow is carried as a natural logarithm.

#include <optional>

namespace rks {

struct BoundContext {
    int n = 1;
    double p = 2.0;
    double R = 4.0;
    double delta = 0.2;
    double C = 1.0;     // kernel decay amplitude
    double alpha = 4.0; // kernel decay rate
    double k = 1.0;     // sup_{x in C_R} ||K(x, .)||_{p'}
    double B_emp = 1.0; // empirical upper frame constant
    int N0 = 1;         // largest lattice count in a unit cell
    double eta = 1.0;   // lattice gap

    double p_conj() const noexcept { return p / (p - 1.0); }
    // Throws ContractError naming the first broken invariant.
    void validate() const;
};

// prod_{j=1..n} (alpha p' - j).
double w_alpha(double alpha, double p_conj, int n);

// R + 2/n + (2/n) [4^n B^{p'-1} |f|^{p'} C^{p'} R^{n(p'-1)} / (w eps^{p'})]^{1/(alpha p' - n)}.
double truncation_N(const BoundContext& ctx, double eps, double f_norm);

// k / (1 - delta)^{1/p}.
double D_constant(const BoundContext& ctx);
// Same, with delta allowed in [0, 1).
double D_constant(double k, double delta, double p);

// (2/n)^n (4^n B^{p'-1} (2 C D)^{p'} R^{n(p'-1)} / w)^{n/(alpha p' - n)}.
double C1_constant(const BoundContext& ctx);

// d_eps = 2^n N0 [(R+2)^n + C1 eps^{-n p'/(alpha p' - n)}].
double covering_dimension(const BoundContext& ctx, double eps);

struct CoveringCount {
    double log_value = 0.0;       // d_eps log(8D/eps)
    std::optional<double> value;  // exp(log_value) when finite
};

// Requires eps < 8D.
CoveringCount covering_count(const BoundContext& ctx, double eps);

// 2 exp(-lambda^2 / (2 r sigma^2 + (2/3) M lambda)); unclamped.
double bernstein_tail(double lambda, int r, double sigma_sq, double M);
// min(1, bernstein_tail(...)).
double bernstein_probability(double lambda, int r, double sigma_sq, double M);

struct ChainingConstants {
    double c1 = 0.0;
    double c2 = 0.0;
    double log_a = 0.0; // log max{exp(q c2), 2 N(1/(2D))}, q = 2^{(n+1)/(n+2)}
    double b = 0.0;     // min{q c1, 3/(4k)}
    double D = 0.0;
    double C1 = 0.0;
    // Alternatives suggested by the first chaining step, which uses
    // N(1/2) and 3/(4 k^p) instead; reported, not used.
    double log_a_half = 0.0;
    double b_kp = 0.0;
};

ChainingConstants chaining_constants(const BoundContext& ctx);

// 2^{1/(n+2)} (n+2) / ((n+1) ln 2).
double gate_threshold(int n);

struct SuccessBound {
    double exponent = 0.0;    // (b/(p k^{p-1} R^n)) r mu^2/(12+mu)
    double log_failure = 0.0; // ln 2 + log a - exponent
    double raw = 0.0;         // 1 - exp(log_failure); may be -inf
    double clamped = 0.0;     // max(0, raw)
    bool vacuous = true;      // raw <= 0
    double phi = 0.0;         // lambda^2/(p k^{p-1}(12 r R^{-n} + lambda)) at lambda = r mu / R^n
    bool gate = false;        // c1 phi - c2 >= gate_threshold(n)
};

// Requires 0 < mu < 1 - delta and r >= 1.
SuccessBound success_probability(const BoundContext& ctx, long long r, double mu);

// p k^{p-1} R^n (12+mu)/(c1 mu^2) [gate_threshold(n) + c2].
double min_sample_size(const BoundContext& ctx, double mu);
double min_sample_size(double p, double k, double R, int n, double mu, double c1, double c2);

} // namespace rks
