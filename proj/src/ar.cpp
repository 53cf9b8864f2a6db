#include "tailcast/ar.hpp"

#include <cmath>
#include <random>

#include "tailcast/error.hpp"
#include "tailcast/stats.hpp"

namespace tailcast {

namespace {

void require_ar1(const ARModel& model, const char* what)
{
    if (model.order != 1 || model.alpha.size() != 1)
        throw Error(ErrorCode::domain, std::string(what) + " requires an AR(1) model");
    if (!(std::abs(model.alpha[0]) < 1.0))
        throw Error(ErrorCode::nonstationary,
                    std::string(what) + ": |alpha| = " + std::to_string(std::abs(model.alpha[0])) + " >= 1");
    if (!(model.sigma2 > 0.0))
        throw Error(ErrorCode::domain, std::string(what) + ": sigma2 must be positive");
}

std::string window_of(const AnomalySeries& series)
{
    std::int64_t first = -1;
    std::int64_t last = -1;
    for (const auto& d : series.days) {
        if (!d.present)
            continue;
        if (first < 0)
            first = d.day;
        last = d.day;
    }
    if (first < 0)
        return {};
    return format_date(series.date_of(first)) + ".." + format_date(series.date_of(last));
}

// Zero-mean autocovariances c_0..c_p, each lag sum divided by the present count.
std::vector<double> autocovariances(const AnomalySeries& series, int max_lag)
{
    const auto n = static_cast<double>(series.present_count());
    std::vector<double> c(static_cast<std::size_t>(max_lag) + 1, 0.0);
    for (int k = 0; k <= max_lag; ++k) {
        double s = 0.0;
        for_each_lag_pair(series, static_cast<std::size_t>(k), [&](double a, double b) { s += a * b; });
        c[static_cast<std::size_t>(k)] = s / n;
    }
    return c;
}

struct LevinsonStep {
    std::vector<double> phi;
    double variance;
};

std::vector<LevinsonStep> levinson_durbin(const std::vector<double>& c, int max_order)
{
    std::vector<LevinsonStep> steps;
    std::vector<double> phi;
    double v = c[0];
    for (int p = 1; p <= max_order; ++p) {
        double num = c[static_cast<std::size_t>(p)];
        for (int j = 1; j < p; ++j)
            num -= phi[static_cast<std::size_t>(j - 1)] * c[static_cast<std::size_t>(p - j)];
        const double k = num / v;
        std::vector<double> next(static_cast<std::size_t>(p));
        for (int j = 1; j < p; ++j)
            next[static_cast<std::size_t>(j - 1)] =
                phi[static_cast<std::size_t>(j - 1)] - k * phi[static_cast<std::size_t>(p - j - 1)];
        next[static_cast<std::size_t>(p - 1)] = k;
        phi = std::move(next);
        v *= 1.0 - k * k;
        if (!(v > 0.0))
            throw Error(ErrorCode::singular_fit,
                        "Yule-Walker recursion lost positive definiteness at order " + std::to_string(p));
        steps.push_back({phi, v});
    }
    return steps;
}

}  // namespace

double ARModel::sigma() const
{
    return std::sqrt(sigma2);
}

const ARModel& OrderSelection::model(int order) const
{
    for (const auto& c : candidates)
        if (c.order == order)
            return c.model;
    throw Error(ErrorCode::domain, "order " + std::to_string(order) + " was not fitted");
}

OrderSelection fit_ar(const AnomalySeries& anomalies, int max_order)
{
    if (max_order < 1)
        throw Error(ErrorCode::domain, "max_order must be >= 1");
    const std::size_t needed = 10 * static_cast<std::size_t>(max_order);
    if (longest_present_run(anomalies) < needed)
        throw Error(ErrorCode::insufficient_data,
                    "AR fit to order " + std::to_string(max_order) + " needs " + std::to_string(needed) +
                        " contiguous present values");

    const auto c = autocovariances(anomalies, max_order);
    if (!(c[0] > 0.0))
        throw Error(ErrorCode::zero_variance, "AR fit of an all-zero series");

    OrderSelection sel;
    for_each_lag_pair(anomalies, 1, [&](double, double) { ++sel.n_pairs; });
    const auto n = static_cast<double>(sel.n_pairs);
    const std::string window = window_of(anomalies);

    const auto steps = levinson_durbin(c, max_order);
    double best = INFINITY;
    for (int p = 1; p <= max_order; ++p) {
        const auto& s = steps[static_cast<std::size_t>(p - 1)];
        OrderCandidate cand{p, ARModel{p, s.phi, s.variance, window}, n * std::log(s.variance) + 2.0 * p};
        if (cand.aic < best) {
            best = cand.aic;
            sel.chosen_order = p;
        }
        sel.candidates.push_back(std::move(cand));
    }
    const auto& ar1 = sel.candidates.front().model;
    if (!(std::abs(ar1.alpha[0]) < 1.0))
        throw Error(ErrorCode::nonstationary,
                    "fitted AR(1) coefficient " + std::to_string(ar1.alpha[0]) + " is not stationary");
    return sel;
}

ARModel fit_ar_order(const AnomalySeries& anomalies, int order)
{
    return fit_ar(anomalies, order).model(order);
}

double stationary_sd(const ARModel& model)
{
    require_ar1(model, "stationary_sd");
    const double a = model.alpha[0];
    return model.sigma() / std::sqrt(1.0 - a * a);
}

double exceedance_prob(const ARModel& model, double t_now, double tau)
{
    require_ar1(model, "exceedance_prob");
    return normal_sf(tau, model.alpha[0] * t_now, model.sigma());
}

AnomalySeries simulate_ar1(double alpha, double sigma, std::size_t n, std::uint64_t seed,
                           const SimulationOptions& options)
{
    if (!(std::abs(alpha) < 1.0))
        throw Error(ErrorCode::nonstationary, "simulate_ar1: |alpha| must be < 1");
    if (!(sigma > 0.0))
        throw Error(ErrorCode::domain, "simulate_ar1: sigma must be positive");
    if (n < 1)
        throw Error(ErrorCode::domain, "simulate_ar1: n must be >= 1");

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, sigma);

    double x = 0.0;
    if (options.burn_in == 0) {
        x = std::normal_distribution<double>(0.0, sigma / std::sqrt(1.0 - alpha * alpha))(rng);
    } else {
        for (std::size_t i = 0; i < options.burn_in; ++i)
            x = alpha * x + noise(rng);
    }

    AnomalySeries out;
    out.epoch = options.epoch;
    out.days.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0)
            x = alpha * x + noise(rng);
        out.days[i] = {static_cast<std::int64_t>(i), x, true};
    }
    return out;
}

}  // namespace tailcast
