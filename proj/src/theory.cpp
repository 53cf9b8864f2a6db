#include "tailcast/theory.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tailcast/error.hpp"
#include "tailcast/stats.hpp"

namespace tailcast {

namespace {

struct Conditioned {
    QuadratureResult numerator;
    QuadratureResult denominator;
};

// Integrates g(t) phi_{0,sigma_C}(t) and phi_{0,sigma_C}(t) over [-W, tau].
template <class G>
Conditioned integrate_below_threshold(const TheoryParams& p, const QuadratureSpec& quad, G&& g)
{
    p.validate();
    quad.validate();
    const double sc = p.stationary_sd();
    const double tau = threshold_from_quantile(p);
    const double lo = -quad.half_width * sc;
    Conditioned out;
    out.numerator = integrate([&](double t) { return g(t, tau) * normal_pdf(t, 0.0, sc); }, lo, tau, quad);
    out.denominator = integrate([&](double t) { return normal_pdf(t, 0.0, sc); }, lo, tau, quad);
    return out;
}

// Error of a ratio n/d from the errors of n and d.
double ratio_error(const Conditioned& c)
{
    const double n = c.numerator.value;
    const double d = c.denominator.value;
    return std::abs(n / d) * (c.numerator.abs_error / std::abs(n == 0.0 ? 1.0 : n) +
                              c.denominator.abs_error / std::abs(d));
}

}  // namespace

double TheoryParams::stationary_sd() const
{
    return sigma / std::sqrt(1.0 - alpha * alpha);
}

void TheoryParams::validate() const
{
    if (!(std::abs(alpha) < 1.0))
        throw Error(ErrorCode::domain, "theory: |alpha| must be < 1");
    if (!(sigma > 0.0))
        throw Error(ErrorCode::domain, "theory: sigma must be positive");
    if (!(q > 0.0 && q < 1.0))
        throw Error(ErrorCode::domain, "theory: q = " + std::to_string(q) + " not in (0, 1)");
    if (q < 1e-4)
        throw Error(ErrorCode::domain, "theory: q below 1e-4 is refused (conditioning mass vanishes)");
}

double threshold_from_quantile(const TheoryParams& params)
{
    if (!(params.q > 0.0 && params.q < 1.0))
        throw Error(ErrorCode::domain, "threshold_from_quantile: q not in (0, 1)");
    return params.stationary_sd() * normal_quantile(params.q);
}

Estimate theoretical_cebr(const TheoryParams& params, const QuadratureSpec& quad)
{
    const auto c = integrate_below_threshold(params, quad, [&](double t, double tau) {
        return normal_cdf(tau, params.alpha * t, params.sigma);
    });
    return {1.0 - c.numerator.value / c.denominator.value, ratio_error(c)};
}

double cebr_expected_brier(double rate)
{
    if (!(rate >= 0.0 && rate <= 1.0))
        throw Error(ErrorCode::domain, "cebr_expected_brier: rate outside [0, 1]");
    return rate * (1.0 - rate);
}

Estimate ar1_expected_brier(const TheoryParams& params, const QuadratureSpec& quad)
{
    const auto c = integrate_below_threshold(params, quad, [&](double t, double tau) {
        const double mean = params.alpha * t;
        return normal_cdf(tau, mean, params.sigma) * normal_sf(tau, mean, params.sigma);
    });
    return {c.numerator.value / c.denominator.value, ratio_error(c)};
}

Estimate theoretical_bss(const TheoryParams& params, const QuadratureSpec& quad)
{
    const Estimate r = theoretical_cebr(params, quad);
    const Estimate b = ar1_expected_brier(params, quad);
    const double ref = r.value * (1.0 - r.value);
    if (!(ref > 0.0))
        throw Error(ErrorCode::undefined_skill, "theoretical_bss: CEBR reference score is zero");
    const double ref_err = std::abs(1.0 - 2.0 * r.value) * r.abs_error;
    const double ratio = b.value / ref;
    return {1.0 - ratio, std::abs(ratio) * (b.abs_error / std::max(b.value, 1e-300) + ref_err / ref)};
}

TheoryRow theory_row(const TheoryParams& params, const QuadratureSpec& quad)
{
    TheoryRow row;
    row.params = params;
    row.tau = threshold_from_quantile(params);
    row.r_tau = theoretical_cebr(params, quad);
    row.brier_cebr = {cebr_expected_brier(std::clamp(row.r_tau.value, 0.0, 1.0)),
                      std::abs(1.0 - 2.0 * row.r_tau.value) * row.r_tau.abs_error};
    row.brier_ar1 = ar1_expected_brier(params, quad);
    row.bss = theoretical_bss(params, quad);
    return row;
}

}  // namespace tailcast
