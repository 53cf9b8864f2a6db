#pragma once

// Gaussian primitives and small sample statistics shared by every module.

#include <cstddef>
#include <span>

namespace tailcast {

inline constexpr double kPi = 3.14159265358979323846;

double normal_pdf(double x, double mean = 0.0, double sd = 1.0);

/// Lower-tail Gaussian CDF, computed through erfc so both tails keep
/// full relative precision.
double normal_cdf(double x, double mean = 0.0, double sd = 1.0);

/// Upper tail 1 - CDF without cancellation.
double normal_sf(double x, double mean = 0.0, double sd = 1.0);

/// Standard normal quantile. Rational approximation (relative error about
/// 1e-9) refined by one Newton step against normal_cdf. Throws
/// ErrorCode::domain outside (0, 1).
double normal_quantile(double p);

double sample_mean(std::span<const double> x);

/// Standard deviation with the n - 1 denominator; 0 for fewer than two values.
double sample_sd(std::span<const double> x);

/// Type-7 (linear interpolation between order statistics) sample quantile.
/// `sorted` must be ascending and non-empty.
double quantile_type7(std::span<const double> sorted, double q);

/// Silverman's rule of thumb for a Gaussian kernel: (4 sd^5 / (3 K))^(1/5).
/// Returns 0 for sd == 0; the caller decides how to treat a zero width.
double silverman_width(double sample_sd, std::size_t count);

}  // namespace tailcast
