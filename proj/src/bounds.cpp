#include "rks/bounds.hpp"

#include "rks/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace rks {

namespace {

constexpr double ln2 = std::numbers::ln2;

void require(bool ok, const std::string& what)
{
    if (!ok)
        throw ContractError(what);
}

bool positive_finite(double v) { return v > 0.0 && std::isfinite(v); }

} // namespace

void BoundContext::validate() const
{
    require(n >= 1 && n <= 2, "bounds: n must be 1 or 2");
    require(p > 1.0 && std::isfinite(p), "bounds: p must lie in (1, inf)");
    require(positive_finite(R), "bounds: R must be positive");
    require(delta > 0.0 && delta < 1.0, "bounds: delta must lie in (0, 1)");
    require(positive_finite(C), "bounds: C must be positive");
    require(positive_finite(k), "bounds: k must be positive");
    require(positive_finite(B_emp), "bounds: B_emp must be positive");
    require(N0 >= 1, "bounds: N0 must be at least 1");
    require(positive_finite(eta), "bounds: eta must be positive");
    require(alpha * p_conj() - n > 0.0, "bounds: alpha p' - n must be positive");
}

double w_alpha(double alpha, double p_conj, int n)
{
    require(n >= 1, "w_alpha: n must be at least 1");
    require(alpha * p_conj - n > 0.0, "w_alpha: alpha p' must exceed n");
    double w = 1.0;
    for (int j = 1; j <= n; ++j)
        w *= alpha * p_conj - j;
    return w;
}

double truncation_N(const BoundContext& ctx, double eps, double f_norm)
{
    ctx.validate();
    require(eps > 0.0, "truncation_N: eps must be positive");
    require(f_norm > 0.0, "truncation_N: f_norm must be positive");
    const int n = ctx.n;
    const double q = ctx.p_conj();
    const double w = w_alpha(ctx.alpha, q, n);
    // Bracket assembled in log form: eps^{-p'} overflows for tiny eps.
    const double log_bracket = n * std::log(4.0) + (q - 1.0) * std::log(ctx.B_emp) + q * std::log(f_norm) +
                               q * std::log(ctx.C) + n * (q - 1.0) * std::log(ctx.R) - std::log(w) -
                               q * std::log(eps);
    const double tail = std::exp(log_bracket / (ctx.alpha * q - n));
    return ctx.R + 2.0 / n + (2.0 / n) * tail;
}

double D_constant(double k, double delta, double p)
{
    require(k > 0.0, "D_constant: k must be positive");
    require(delta >= 0.0 && delta < 1.0, "D_constant: delta must lie in [0, 1)");
    require(p > 1.0, "D_constant: p must exceed 1");
    return k / std::pow(1.0 - delta, 1.0 / p);
}

double D_constant(const BoundContext& ctx)
{
    ctx.validate();
    return D_constant(ctx.k, ctx.delta, ctx.p);
}

double C1_constant(const BoundContext& ctx)
{
    ctx.validate();
    const int n = ctx.n;
    const double q = ctx.p_conj();
    const double w = w_alpha(ctx.alpha, q, n);
    const double D = D_constant(ctx);
    const double log_inner = n * std::log(4.0) + (q - 1.0) * std::log(ctx.B_emp) + q * std::log(2.0 * ctx.C * D) +
                             n * (q - 1.0) * std::log(ctx.R) - std::log(w);
    return std::pow(2.0 / n, n) * std::exp(log_inner * n / (ctx.alpha * q - n));
}

double covering_dimension(const BoundContext& ctx, double eps)
{
    require(eps > 0.0, "covering_dimension: eps must be positive");
    const int n = ctx.n;
    const double q = ctx.p_conj();
    const double C1 = C1_constant(ctx);
    return std::pow(2.0, n) * ctx.N0 *
           (std::pow(ctx.R + 2.0, n) + C1 * std::pow(eps, -n * q / (ctx.alpha * q - n)));
}

CoveringCount covering_count(const BoundContext& ctx, double eps)
{
    require(eps > 0.0, "covering_count: eps must be positive");
    const double D = D_constant(ctx);
    require(eps < 8.0 * D, "covering_count: eps must be below 8D = " + std::to_string(8.0 * D));
    CoveringCount out;
    out.log_value = covering_dimension(ctx, eps) * std::log(8.0 * D / eps);
    const double v = std::exp(out.log_value);
    if (std::isfinite(v))
        out.value = v;
    return out;
}

double bernstein_tail(double lambda, int r, double sigma_sq, double M)
{
    require(lambda >= 0.0, "bernstein_tail: lambda must be non-negative");
    require(r >= 1, "bernstein_tail: r must be at least 1");
    require(sigma_sq > 0.0, "bernstein_tail: sigma^2 must be positive");
    require(M > 0.0, "bernstein_tail: M must be positive");
    return 2.0 * std::exp(-lambda * lambda / (2.0 * r * sigma_sq + (2.0 / 3.0) * M * lambda));
}

double bernstein_probability(double lambda, int r, double sigma_sq, double M)
{
    return std::min(1.0, bernstein_tail(lambda, r, sigma_sq, M));
}

ChainingConstants chaining_constants(const BoundContext& ctx)
{
    ctx.validate();
    const int n = ctx.n;
    const double nn = n;
    ChainingConstants out;
    out.D = D_constant(ctx);
    out.C1 = C1_constant(ctx);
    out.c1 = std::pow(2.0, 4.0 / ln2 - 10.0) * std::pow(ln2, 4) / std::pow(nn + 2.0, 4);

    const double logD = std::log(out.D);
    const double box = std::pow(ctx.R + 2.0, n);
    const double s = std::pow(2.0, -2.0 * (nn + 1.0) / (nn + 2.0));
    const double m = (nn + 1.0) * (nn + 2.0);
    const double t1 = 9.0 * box * s * ln2;
    const double t2 = 2.0 * box * s * logD;
    const double t3 = out.C1 * 2.0 * m * std::pow(2.0, -(2.0 * m - 5.0 * ln2) / (2.0 * m * ln2));
    const double t4 = out.C1 * std::pow(2.0, 1.0 - 2.0 / m) * logD;
    out.c2 = std::pow(2.0, n) * ctx.N0 * (t1 + t2 + t3 + t4);

    // Covering numbers of a set inside the sup-norm ball of radius D: a single
    // ball suffices once eps >= 8D, so log N = 0 there.
    auto log_N = [&](double eps) { return eps < 8.0 * out.D ? covering_count(ctx, eps).log_value : 0.0; };

    const double q = std::pow(2.0, (nn + 1.0) / (nn + 2.0));
    out.log_a = std::max(q * out.c2, ln2 + log_N(1.0 / (2.0 * out.D)));
    out.b = std::min(q * out.c1, 3.0 / (4.0 * ctx.k));
    out.log_a_half = std::max(q * out.c2, ln2 + log_N(0.5));
    out.b_kp = std::min(q * out.c1, 3.0 / (4.0 * std::pow(ctx.k, ctx.p)));
    return out;
}

double gate_threshold(int n)
{
    const double nn = n;
    return std::pow(2.0, 1.0 / (nn + 2.0)) * (nn + 2.0) / ((nn + 1.0) * ln2);
}

SuccessBound success_probability(const BoundContext& ctx, long long r, double mu)
{
    ctx.validate();
    require(r >= 1, "success_probability: r must be at least 1");
    require(mu > 0.0 && mu < 1.0 - ctx.delta, "success_probability: mu must lie in (0, 1 - delta)");
    const ChainingConstants cc = chaining_constants(ctx);
    const double scale = ctx.p * std::pow(ctx.k, ctx.p - 1.0) * std::pow(ctx.R, ctx.n);
    const double rr = static_cast<double>(r);

    SuccessBound out;
    out.exponent = cc.b / scale * rr * mu * mu / (12.0 + mu);
    out.log_failure = ln2 + cc.log_a - out.exponent;
    // 1 - exp(L) without overflow: exp(L) = inf gives -inf.
    out.raw = -std::expm1(out.log_failure);
    out.clamped = std::max(0.0, out.raw);
    out.vacuous = !(out.raw > 0.0);
    out.phi = rr * mu * mu / (scale * (12.0 + mu));
    out.gate = cc.c1 * out.phi - cc.c2 >= gate_threshold(ctx.n);
    return out;
}

double min_sample_size(double p, double k, double R, int n, double mu, double c1, double c2)
{
    require(p > 1.0 && k > 0.0 && R > 0.0 && n >= 1 && mu > 0.0 && c1 > 0.0,
            "min_sample_size: arguments must be positive");
    return p * std::pow(k, p - 1.0) * std::pow(R, n) * (12.0 + mu) / (c1 * mu * mu) * (gate_threshold(n) + c2);
}

double min_sample_size(const BoundContext& ctx, double mu)
{
    ctx.validate();
    require(mu > 0.0 && mu < 1.0 - ctx.delta, "min_sample_size: mu must lie in (0, 1 - delta)");
    const ChainingConstants cc = chaining_constants(ctx);
    return min_sample_size(ctx.p, ctx.k, ctx.R, ctx.n, mu, cc.c1, cc.c2);
}

} // namespace rks
