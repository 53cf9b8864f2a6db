#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tailcast/series.hpp"

namespace tailcast {

/// Zero-mean autoregressive model T_{n+1} = sum_i alpha_i T_{n+1-i} + eps,
/// eps ~ N(0, sigma2).
struct ARModel {
    int order = 1;
    std::vector<double> alpha;
    double sigma2 = 1.0;
    std::string source_window;

    double sigma() const;
};

struct OrderCandidate {
    int order = 0;
    ARModel model;
    double aic = 0.0;
};

struct OrderSelection {
    std::vector<OrderCandidate> candidates;  // orders 1..max_order
    int chosen_order = 1;                    // AIC minimum, ties to the smaller order
    std::size_t n_pairs = 0;                 // N used in the AIC

    const ARModel& chosen() const { return model(chosen_order); }
    const ARModel& model(int order) const;
};

/// Yule-Walker fits (Levinson-Durbin recursion) for every order up to
/// `max_order`, with the mean fixed at zero. Autocovariances use only pairs
/// whose members are both present. AIC = N ln(sigma2) + 2p with N the number
/// of present lag-1 pairs.
OrderSelection fit_ar(const AnomalySeries& anomalies, int max_order);

/// Single fit at a forced order (the forecasting default is order 1).
ARModel fit_ar_order(const AnomalySeries& anomalies, int order);

/// sigma / sqrt(1 - alpha^2) for an AR(1) model.
double stationary_sd(const ARModel& model);

/// P(T_{n+1} > tau | T_n = t_now) = 1 - Phi_{alpha t, sigma}(tau) for AR(1).
double exceedance_prob(const ARModel& model, double t_now, double tau);

struct SimulationOptions {
    Date epoch = Date{std::chrono::year{1970} / 1 / 1};
    /// 0: start from a stationary draw N(0, sigma_C^2). Otherwise start at
    /// zero and discard this many steps.
    std::size_t burn_in = 0;
};

AnomalySeries simulate_ar1(double alpha, double sigma, std::size_t n, std::uint64_t seed,
                           const SimulationOptions& options = {});

}  // namespace tailcast
