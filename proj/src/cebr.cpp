#include "tailcast/cebr.hpp"

#include <string>

#include "tailcast/error.hpp"

namespace tailcast {

CEBRModel empirical_cebr(const AnomalySeries& training, double tau)
{
    std::size_t trials = 0;
    std::size_t events = 0;
    for_each_lag_pair(training, 1, [&](double now, double next) {
        if (now > tau)
            return;
        ++trials;
        if (next > tau)
            ++events;
    });
    if (trials == 0)
        throw Error(ErrorCode::no_trials,
                    "no training day at or below tau = " + std::to_string(tau) + " with a successor");
    return {tau, static_cast<double>(events) / static_cast<double>(trials), trials};
}

std::optional<double> cebr_forecast(const CEBRModel& model, double t_now)
{
    if (t_now > model.tau)
        return std::nullopt;
    return model.rate;
}

}  // namespace tailcast
