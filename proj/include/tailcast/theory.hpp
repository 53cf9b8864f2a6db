#pragma once

#include "tailcast/quadrature.hpp"

namespace tailcast {

/// AR(1) process parameters plus the climatological quantile q that
/// defines the threshold tau.
struct TheoryParams {
    double alpha = 0.0;
    double sigma = 1.0;
    double q = 0.5;

    double stationary_sd() const;
    /// Throws ErrorCode::domain unless |alpha| < 1, sigma > 0 and
    /// 1e-4 <= q < 1 (below 1e-4 the conditioning denominator vanishes).
    void validate() const;
};

struct Estimate {
    double value = 0.0;
    double abs_error = 0.0;
};

/// tau = sigma_C Phi^{-1}(q).
double threshold_from_quantile(const TheoryParams& params);

/// r_tau = 1 - N/D with N = int_{-W}^{tau} Phi_{alpha t,sigma}(tau) phi_{0,sigma_C}(t) dt and
/// D = int_{-W}^{tau} phi_{0,sigma_C}(t) dt, W = half_width sigma_C.
Estimate theoretical_cebr(const TheoryParams& params, const QuadratureSpec& quad = {});

/// r (1 - r).
double cebr_expected_brier(double rate);

/// D^{-1} int phi_{0,sigma_C}(t) Phi_{alpha t,sigma}(tau) [1 - Phi_{alpha t,sigma}(tau)] dt.
Estimate ar1_expected_brier(const TheoryParams& params, const QuadratureSpec& quad = {});

/// 1 - ar1_expected_brier / cebr_expected_brier(theoretical_cebr).
/// Throws ErrorCode::undefined_skill when the reference score is zero.
Estimate theoretical_bss(const TheoryParams& params, const QuadratureSpec& quad = {});

/// Everything the theory CSV reports for one (alpha, q) cell.
struct TheoryRow {
    TheoryParams params;
    double tau = 0.0;
    Estimate r_tau;
    Estimate brier_cebr;
    Estimate brier_ar1;
    Estimate bss;
};

TheoryRow theory_row(const TheoryParams& params, const QuadratureSpec& quad = {});

}  // namespace tailcast
