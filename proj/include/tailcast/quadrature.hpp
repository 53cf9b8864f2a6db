#pragma once

#include <functional>

namespace tailcast {

struct QuadratureSpec {
    double abs_tol = 1e-9;
    double rel_tol = 1e-8;
    /// Lower truncation of semi-infinite Gaussian integrals, in units of the
    /// stationary standard deviation.
    double half_width = 10.0;
    int max_subdivisions = 1000;

    /// Throws ErrorCode::domain for non-positive tolerances or half_width < 8.
    void validate() const;
};

struct QuadratureResult {
    double value = 0.0;
    double abs_error = 0.0;
    int intervals = 0;
};

/// Globally adaptive 15-point Gauss-Kronrod quadrature. The interval with
/// the largest |K15 - G7| estimate is bisected until the summed estimate is
/// below max(abs_tol, rel_tol |value|). Throws QuadratureError (carrying the
/// estimate reached) when the subdivision limit is hit.
QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           const QuadratureSpec& spec = {});

}  // namespace tailcast
