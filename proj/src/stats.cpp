#include "tailcast/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "tailcast/error.hpp"

namespace tailcast {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

// Acklam's rational approximation to the standard normal quantile.
double quantile_initial(double p)
{
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                   -2.759285104469687e+02, 1.383577518672690e+02,
                                   -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                   -1.556989798598866e+02, 6.680131188771972e+01,
                                   -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                   -2.400758277161838e+00, -2.549732539343734e+00,
                                   4.374664141464968e+00, 2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                   2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double p_low = 0.02425;

    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > 1.0 - p_low) {
        const double q = std::sqrt(-2.0 * std::log1p(-p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double q = p - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace

double normal_pdf(double x, double mean, double sd)
{
    const double z = (x - mean) / sd;
    return kInvSqrt2Pi / sd * std::exp(-0.5 * z * z);
}

double normal_cdf(double x, double mean, double sd)
{
    return 0.5 * std::erfc(-(x - mean) / sd * kInvSqrt2);
}

double normal_sf(double x, double mean, double sd)
{
    return 0.5 * std::erfc((x - mean) / sd * kInvSqrt2);
}

double normal_quantile(double p)
{
    if (!(p > 0.0 && p < 1.0))
        throw Error(ErrorCode::domain, "normal_quantile: p = " + std::to_string(p) + " not in (0, 1)");
    double x = quantile_initial(p);
    // Newton on whichever tail keeps the residual well conditioned.
    const double resid = p < 0.5 ? normal_cdf(x) - p : (1.0 - p) - normal_sf(x);
    x -= resid / normal_pdf(x);
    return x;
}

double sample_mean(std::span<const double> x)
{
    if (x.empty())
        return 0.0;
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double sample_sd(std::span<const double> x)
{
    if (x.size() < 2)
        return 0.0;
    const double m = sample_mean(x);
    double ss = 0.0;
    for (double v : x)
        ss += (v - m) * (v - m);
    return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

double quantile_type7(std::span<const double> sorted, double q)
{
    if (sorted.empty())
        throw Error(ErrorCode::insufficient_data, "quantile of an empty sample");
    if (!(q >= 0.0 && q <= 1.0))
        throw Error(ErrorCode::domain, "quantile level outside [0, 1]");
    const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double silverman_width(double sample_sd, std::size_t count)
{
    if (sample_sd < 0.0 || count < 2)
        throw Error(ErrorCode::domain, "silverman_width: needs sd >= 0 and at least two samples");
    if (sample_sd == 0.0)
        return 0.0;
    return std::pow(4.0 * std::pow(sample_sd, 5) / (3.0 * static_cast<double>(count)), 0.2);
}

}  // namespace tailcast
