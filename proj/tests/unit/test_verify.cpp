#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "oracles.hpp"
#include "tailcast/ar.hpp"
#include "tailcast/error.hpp"
#include "tailcast/theory.hpp"
#include "tailcast/verify.hpp"

using namespace tailcast;

namespace {

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

AnomalySeries from_values(const std::vector<double>& v)
{
    AnomalySeries s;
    s.epoch = parse_date("2000-01-01");
    for (std::size_t i = 0; i < v.size(); ++i)
        s.days.push_back({static_cast<std::int64_t>(i), v[i], true});
    return s;
}

TrialSet make_trials(const std::vector<double>& p, const std::vector<int>& x)
{
    TrialSet t;
    for (std::size_t i = 0; i < p.size(); ++i)
        t.trials.push_back({static_cast<std::int64_t>(i), p[i], x[i]});
    return t;
}

std::vector<std::pair<double, double>> fh(const RocCurve& c)
{
    std::vector<std::pair<double, double>> out;
    for (const auto& p : c.points)
        out.emplace_back(p.false_alarm_rate, p.hit_rate);
    return out;
}

// Independent DeLong computation from the structural components.
std::pair<double, double> delong_oracle(const std::vector<double>& p, const std::vector<int>& x)
{
    std::vector<double> ev, ne;
    for (std::size_t i = 0; i < p.size(); ++i)
        (x[i] ? ev : ne).push_back(p[i]);
    const auto psi = [](double a, double b) { return a > b ? 1.0 : (a == b ? 0.5 : 0.0); };
    std::vector<double> v10(ev.size(), 0.0), v01(ne.size(), 0.0);
    for (std::size_t i = 0; i < ev.size(); ++i)
        for (std::size_t j = 0; j < ne.size(); ++j) {
            v10[i] += psi(ev[i], ne[j]) / ne.size();
            v01[j] += psi(ev[i], ne[j]) / ev.size();
        }
    double a = 0;
    for (double v : v10)
        a += v / ev.size();
    double s10 = 0, s01 = 0;
    for (double v : v10)
        s10 += (v - a) * (v - a) / (ev.size() - 1);
    for (double v : v01)
        s01 += (v - a) * (v - a) / (ne.size() - 1);
    return {a, s10 / ev.size() + s01 / ne.size()};
}

}  // namespace

TEST_CASE("build_trials issues forecasts only at or below the threshold")
{
    const auto s = from_values({-1, 1, -1});
    const CEBRModel m{0.0, 0.4, 5};
    const auto t = build_trials(cebr_forecaster(m), s, 0.0, "cebr");
    REQUIRE(t.size() == 1);
    CHECK(t.trials[0].day == 0);
    CHECK(t.trials[0].x == 1);
    CHECK(t.trials[0].p == 0.4);
    CHECK(t.scheme == "cebr");
    CHECK(build_trials(cebr_forecaster(m), s, -5.0).empty());

    const auto long_s = simulate_ar1(0.72, 3.06, 2000, 3);
    const auto all = build_trials(cebr_forecaster({0.5, 0.31, 1}), long_s, 0.5);
    CHECK(all.size() > 500);
    for (const auto& tr : all.trials)
        CHECK(tr.p == 0.31);

    // a present day whose successor is missing yields no trial
    AnomalySeries g = from_values({-1, 0, -2});
    g.days[1].present = false;
    CHECK(build_trials(cebr_forecaster(m), g, 0.0).empty());
}

TEST_CASE("table_forecaster looks up the next day's probability")
{
    const auto s = from_values({-1, -1, 3});
    std::vector<DayProbability> table{{s.date_of(1), 0.2}, {s.date_of(2), 0.9}};
    const auto t = build_trials(table_forecaster(table), s, 0.0);
    REQUIRE(t.size() == 2);
    CHECK(t.trials[0].p == 0.2);
    CHECK(t.trials[1].p == 0.9);
    CHECK(t.events() == 1);
}

TEST_CASE("brier and bss")
{
    CHECK(brier(1.0, 1) == 0.0);
    CHECK(brier(0.5, 0) == 0.25);
    CHECK(brier(0.7, 1) == doctest::Approx(0.09));
    CHECK(code_of([] { brier(1.2, 1); }) == ErrorCode::domain);
    CHECK(code_of([] { brier(0.5, 2); }) == ErrorCode::domain);
    CHECK(bss(0.2, 0.2) == 0.0);
    CHECK(bss(0.0, 0.2) == 1.0);
    CHECK(bss(0.3, 0.2) == doctest::Approx(-0.5));
    CHECK(code_of([] { bss(0.1, 0.0); }) == ErrorCode::undefined_skill);
    CHECK(code_of([] { mean_brier(TrialSet{}); }) == ErrorCode::no_trials);
}

TEST_CASE("align_trials keeps common days only")
{
    TrialSet a = make_trials({0.1, 0.2, 0.3}, {0, 1, 0});
    TrialSet b;
    b.trials = {{1, 0.5, 1}, {2, 0.5, 0}, {7, 0.5, 1}};
    const auto [x, y] = align_trials(a, b);
    REQUIRE(x.size() == 2);
    CHECK(x.trials[0].day == 1);
    CHECK(y.trials[1].day == 2);
}

TEST_CASE("bss_confidence")
{
    const auto s = simulate_ar1(0.72, 3.06, 3000, 8);
    const ARModel ar{1, {0.72}, 3.06 * 3.06, {}};
    const double tau = 0.0;
    const auto c = build_trials(cebr_forecaster({tau, 0.244, 1}), s, tau);
    const auto a = build_trials(ar1_forecaster(ar, tau), s, tau);

    const auto same = bss_confidence(c, c);
    CHECK(same.lo == 0.0);
    CHECK(same.hi == 0.0);

    BootstrapOptions o;
    o.seed = 5;
    const auto i95 = bss_confidence(a, c, o);
    o.level = 0.5;
    const auto i50 = bss_confidence(a, c, o);
    const double point = bss(mean_brier(a), mean_brier(c));
    CHECK(i95.lo <= i50.lo);
    CHECK(i95.hi >= i50.hi);
    CHECK(i50.lo <= point);
    CHECK(point <= i50.hi);
    o.level = 0.95;
    const auto again = bss_confidence(a, c, o);
    CHECK(again.lo == i95.lo);
    CHECK(again.hi == i95.hi);

    TrialSet tiny = make_trials({0.1, 0.2}, {0, 1});
    CHECK(code_of([&] { bss_confidence(tiny, tiny); }) == ErrorCode::insufficient_data);
}

TEST_CASE("bss_confidence covers the theoretical BSS in at least 90 of 100 experiments")
{
    const TheoryParams tp{0.72, 3.06, 0.5};
    const double tau = threshold_from_quantile(tp);
    const double r = theoretical_cebr(tp).value;
    const double target = theoretical_bss(tp).value;
    const ARModel ar{1, {0.72}, 3.06 * 3.06, {}};
    int covered = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto s = simulate_ar1(0.72, 3.06, 20000, 7000 + seed);
        const auto c = build_trials(cebr_forecaster({tau, r, 1}), s, tau);
        const auto a = build_trials(ar1_forecaster(ar, tau), s, tau);
        BootstrapOptions o;
        o.seed = seed;
        const auto ci = bss_confidence(a, c, o);
        covered += ci.lo <= target && target <= ci.hi;
    }
    MESSAGE("covered " << covered << " of 100");
    CHECK(covered >= 90);
}

TEST_CASE("deterministic alarms use a strict inequality")
{
    CHECK(deterministic(0.7, 0.5) == 1);
    CHECK(deterministic(0.5, 0.5) == 0);
    CHECK(deterministic(0.2, 0.5) == 0);
}

TEST_CASE("roc_curve hand sweep and shapes")
{
    const auto c = roc_curve(make_trials({0.9, 0.8, 0.3, 0.1}, {1, 0, 1, 0}));
    const std::vector<std::pair<double, double>> want{{0, 0}, {0, 0.5}, {0.5, 0.5}, {0.5, 1}, {1, 1}};
    CHECK(fh(c) == want);
    CHECK(std::isinf(c.points.front().zeta));
    CHECK(c.points.front().zeta > 0);
    CHECK(c.points.back().zeta < 0);
    CHECK(auc(c) == 0.75);
    CHECK(oracle::mann_whitney({0.9, 0.8, 0.3, 0.1}, {1, 0, 1, 0}) == 0.75);

    // each point's rates follow the alarm rule at its zeta
    for (const auto& pt : c.points) {
        const std::vector<double> p{0.9, 0.8, 0.3, 0.1};
        const std::vector<int> x{1, 0, 1, 0};
        double h = 0, f = 0;
        for (int i = 0; i < 4; ++i)
            (x[i] ? h : f) += deterministic(p[i], pt.zeta);
        CHECK(pt.hit_rate == h / 2);
        CHECK(pt.false_alarm_rate == f / 2);
    }

    const std::vector<int> x{1, 0, 0, 1, 0, 1, 1, 0};
    const auto flat = roc_curve(make_trials(std::vector<double>(8, 0.3), x));
    const std::vector<std::pair<double, double>> diag{{0, 0}, {1, 1}};
    CHECK(fh(flat) == diag);
    CHECK(auc(flat) == 0.5);

    const auto perfect = roc_curve(make_trials({0.9, 0.8, 0.2, 0.1}, {1, 1, 0, 0}));
    CHECK(std::find(fh(perfect).begin(), fh(perfect).end(), std::make_pair(0.0, 1.0)) != fh(perfect).end());
    CHECK(auc(perfect) == 1.0);

    CHECK(code_of([] { roc_curve(make_trials({0.1, 0.2}, {1, 1})); }) == ErrorCode::degenerate);
    CHECK(code_of([] { roc_curve(make_trials({0.1, 0.2}, {0, 0})); }) == ErrorCode::degenerate);
}

TEST_CASE("roc_curve is monotone with exact endpoints on random tied data")
{
    std::mt19937_64 rng(4);
    std::uniform_int_distribution<int> level(0, 9);
    std::bernoulli_distribution coin(0.3);
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<double> p;
        std::vector<int> x;
        for (int i = 0; i < 200; ++i) {
            p.push_back(level(rng) / 10.0);
            x.push_back(coin(rng));
        }
        const auto c = roc_curve(make_trials(p, x));
        CHECK(fh(c).front() == std::make_pair(0.0, 0.0));
        CHECK(fh(c).back() == std::make_pair(1.0, 1.0));
        for (std::size_t i = 1; i < c.points.size(); ++i) {
            CHECK(c.points[i].false_alarm_rate >= c.points[i - 1].false_alarm_rate);
            CHECK(c.points[i].hit_rate >= c.points[i - 1].hit_rate);
            CHECK(c.points[i].zeta < c.points[i - 1].zeta);
        }
        CHECK(std::abs(auc(c) - oracle::mann_whitney(p, x)) < 1e-12);
    }
}

TEST_CASE("auc_delong_ci")
{
    const auto perfect = auc_delong_ci(make_trials({0.9, 0.8, 0.2, 0.1}, {1, 1, 0, 0}));
    CHECK(perfect.auc == 1.0);
    CHECK(perfect.variance == 0.0);
    CHECK(perfect.ci.lo == 1.0);
    CHECK(perfect.ci.hi == 1.0);

    const auto four = auc_delong_ci(make_trials({0.9, 0.8, 0.3, 0.1}, {1, 0, 1, 0}));
    CHECK(four.auc == 0.75);
    CHECK(four.variance == doctest::Approx(0.125));
    CHECK(four.ci.lo == doctest::Approx(0.75 - 1.959963985 * std::sqrt(0.125)));
    CHECK(four.ci.hi == 1.0);

    std::mt19937_64 rng(12);
    std::normal_distribution<double> z;
    std::bernoulli_distribution coin(0.4);
    std::vector<double> p;
    std::vector<int> x;
    for (int i = 0; i < 300; ++i) {
        x.push_back(coin(rng));
        p.push_back(std::round((z(rng) + x.back()) * 4) / 4);  // coarse values: many ties
    }
    const auto est = auc_delong_ci(make_trials(p, x), 0.9);
    const auto [a, v] = delong_oracle(p, x);
    CHECK(est.auc == doctest::Approx(a).epsilon(1e-12));
    CHECK(est.variance == doctest::Approx(v).epsilon(1e-10));
    CHECK(est.ci.lo <= est.auc);
    CHECK(est.ci.hi >= est.auc);
    CHECK(est.ci.hi - est.ci.lo == doctest::Approx(2 * 1.6448536 * std::sqrt(v)).epsilon(1e-6));
    CHECK(code_of([] { auc_delong_ci(make_trials({0.1, 0.2, 0.3}, {1, 0, 0})); }) == ErrorCode::degenerate);
}

namespace {

// Percentile interval from resampling trials with replacement, classes kept.
std::pair<double, double> bootstrap_auc(const std::vector<double>& p, const std::vector<int>& x, int reps,
                                        std::uint64_t seed)
{
    std::vector<double> ev, ne;
    for (std::size_t i = 0; i < p.size(); ++i)
        (x[i] ? ev : ne).push_back(p[i]);
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pe(0, ev.size() - 1), pn(0, ne.size() - 1);
    std::vector<double> stats;
    for (int r = 0; r < reps; ++r) {
        std::vector<double> pp;
        std::vector<int> xx;
        for (std::size_t i = 0; i < ev.size(); ++i) {
            pp.push_back(ev[pe(rng)]);
            xx.push_back(1);
        }
        for (std::size_t i = 0; i < ne.size(); ++i) {
            pp.push_back(ne[pn(rng)]);
            xx.push_back(0);
        }
        stats.push_back(oracle::mann_whitney(pp, xx));
    }
    std::sort(stats.begin(), stats.end());
    return {stats[static_cast<std::size_t>(0.025 * reps)], stats[static_cast<std::size_t>(0.975 * reps) - 1]};
}

}  // namespace

TEST_CASE("DeLong interval agrees with a 10^4 replicate bootstrap on the 4-trial example" * doctest::may_fail())
{
    // With two trials per class the bootstrap distribution is a handful of
    // atoms; its 2.5% point is 0 while the normal interval starts near 0.057.
    const std::vector<double> p{0.9, 0.8, 0.3, 0.1};
    const std::vector<int> x{1, 0, 1, 0};
    const auto est = auc_delong_ci(make_trials(p, x));
    const auto [lo, hi] = bootstrap_auc(p, x, 10000, 1);
    CHECK(std::abs(est.ci.lo - lo) < 0.05);
    CHECK(std::abs(est.ci.hi - hi) < 0.05);
}

TEST_CASE("DeLong interval agrees with a 10^4 replicate bootstrap on a 400-trial set")
{
    std::mt19937_64 rng(21);
    std::normal_distribution<double> z;
    std::bernoulli_distribution coin(0.35);
    std::vector<double> p;
    std::vector<int> x;
    for (int i = 0; i < 400; ++i) {
        x.push_back(coin(rng));
        p.push_back(z(rng) + 0.8 * x.back());
    }
    const auto est = auc_delong_ci(make_trials(p, x));
    const auto [lo, hi] = bootstrap_auc(p, x, 10000, 2);
    CHECK(std::abs(est.ci.lo - lo) < 0.02);
    CHECK(std::abs(est.ci.hi - hi) < 0.02);
}

TEST_CASE("threshold_sweep on synthetic AR(1) data")
{
    SimulationOptions o;
    o.epoch = parse_date("1946-01-01");
    SuiteInputs in;
    in.observations = simulate_ar1(0.72, 3.06, 365 * 40, 31, o);
    in.train = {1946, 1975};
    in.test = {1976, 1985};
    const ForecastSuite suite(in);
    CHECK(std::abs(suite.ar_model().alpha[0] - 0.72) < 0.03);

    SweepOptions opt;
    opt.q_grid = {0.2, 0.5, 0.8, 0.999};
    opt.bootstrap.replicates = 300;
    const std::vector<Scheme> schemes{Scheme::cebr, Scheme::ar1};
    const auto rep = threshold_sweep(suite, schemes, opt);
    REQUIRE(rep.rows.size() == 8);
    for (const auto& row : rep.rows) {
        if (row.q == 0.999) {
            CHECK(std::find(row.flags.begin(), row.flags.end(), "degenerate") != row.flags.end());
            continue;
        }
        CHECK(row.flags.empty());
        if (row.scheme == Scheme::cebr) {
            CHECK(row.bss == 0.0);
            CHECK(row.bss_lo == 0.0);
            CHECK(row.bss_hi == 0.0);
        } else {
            CHECK(row.bss > 0.0);
            CHECK(row.bss <= 1.0);
            CHECK(row.bss_lo <= row.bss);
            CHECK(row.bss <= row.bss_hi);
            CHECK(row.auc_lo <= row.auc);
            CHECK(row.auc <= row.auc_hi);
            CHECK(row.auc > 0.5);
        }
        CHECK(row.tau == suite.threshold(row.q));
    }

    SuiteInputs bad = in;
    bad.test = {1970, 1980};
    CHECK(code_of([&] { ForecastSuite s(bad); }) == ErrorCode::domain);

    opt.q_grid = {0.5};
    const std::vector<Scheme> ens{Scheme::raw_ensemble};
    CHECK(code_of([&] { threshold_sweep(suite, ens, opt); }) == ErrorCode::domain);
}

TEST_CASE("propriety: expected Brier is minimised by the honest probability")
{
    for (int i = 1; i <= 9; ++i) {
        const double p = i / 10.0;
        int best = 0;
        double best_score = 1e9;
        for (int j = 0; j <= 100; ++j) {
            const double q = j / 100.0;
            const double s = p * brier(q, 1) + (1 - p) * brier(q, 0);
            if (s < best_score) {
                best_score = s;
                best = j;
            }
        }
        CHECK(best == i * 10);
    }
}
