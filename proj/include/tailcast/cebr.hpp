#pragma once

#include <cstddef>
#include <optional>

#include "tailcast/series.hpp"

namespace tailcast {

/// Conditional exceedance base rate: P(T_{n+1} > tau | T_n <= tau).
struct CEBRModel {
    double tau = 0.0;
    double rate = 0.0;
    std::size_t trials_used = 0;
};

/// Counts consecutive present pairs with T_n <= tau; the rate is the
/// fraction followed by T_{n+1} > tau. A rate of exactly 0 or 1 is kept as
/// is (fine for the Brier score, not for logarithmic scores).
/// Throws ErrorCode::no_trials when no pair qualifies.
CEBRModel empirical_cebr(const AnomalySeries& training, double tau);

/// The constant rate, or nullopt when t_now > tau (no forecast is issued).
std::optional<double> cebr_forecast(const CEBRModel& model, double t_now);

}  // namespace tailcast
