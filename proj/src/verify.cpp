#include "tailcast/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>

#include "tailcast/error.hpp"
#include "tailcast/stats.hpp"

namespace tailcast {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

}  // namespace

// --- trials ----------------------------------------------------------------

std::size_t TrialSet::events() const
{
    return static_cast<std::size_t>(
        std::count_if(trials.begin(), trials.end(), [](const Trial& t) { return t.x == 1; }));
}

Forecaster cebr_forecaster(const CEBRModel& model)
{
    return [model](Date, double t_now) { return cebr_forecast(model, t_now); };
}

Forecaster ar1_forecaster(const ARModel& model, double tau)
{
    // Validates the model once up front.
    (void)exceedance_prob(model, 0.0, tau);
    return [model, tau](Date, double t_now) -> std::optional<double> { return exceedance_prob(model, t_now, tau); };
}

Forecaster table_forecaster(std::vector<DayProbability> table)
{
    std::map<Date, double> lookup;
    for (const auto& e : table)
        lookup[e.target] = e.p;
    return [lookup = std::move(lookup)](Date day, double) -> std::optional<double> {
        const auto it = lookup.find(day + std::chrono::days{1});
        if (it == lookup.end())
            return std::nullopt;
        return it->second;
    };
}

TrialSet build_trials(const Forecaster& forecaster, const AnomalySeries& test, double tau, std::string scheme)
{
    TrialSet set;
    set.tau = tau;
    set.scheme = std::move(scheme);
    const auto& d = test.days;
    for (std::size_t i = 0; i + 1 < d.size(); ++i) {
        if (!d[i].present || !d[i + 1].present || d[i + 1].day != d[i].day + 1)
            continue;
        if (d[i].value > tau)
            continue;
        const auto p = forecaster(test.date_of(d[i].day), d[i].value);
        if (!p)
            continue;
        if (!(*p >= 0.0 && *p <= 1.0))
            throw Error(ErrorCode::domain, "forecaster returned probability " + std::to_string(*p));
        set.trials.push_back({d[i].day, *p, d[i + 1].value > tau ? 1 : 0});
    }
    return set;
}

// --- scores ----------------------------------------------------------------

double brier(double p, int x)
{
    if (!(p >= 0.0 && p <= 1.0) || (x != 0 && x != 1))
        throw Error(ErrorCode::domain, "brier: need p in [0,1] and x in {0,1}");
    const double d = static_cast<double>(x) - p;
    return d * d;
}

double mean_brier(const TrialSet& trials)
{
    if (trials.empty())
        throw Error(ErrorCode::no_trials, "mean Brier score of an empty trial set");
    double s = 0.0;
    for (const auto& t : trials.trials)
        s += brier(t.p, t.x);
    return s / static_cast<double>(trials.size());
}

double bss(double mean_s1, double mean_s2)
{
    if (!(mean_s2 > 0.0))
        throw Error(ErrorCode::undefined_skill, "BSS undefined for a zero reference score");
    return 1.0 - mean_s1 / mean_s2;
}

std::pair<TrialSet, TrialSet> align_trials(const TrialSet& a, const TrialSet& b)
{
    std::pair<TrialSet, TrialSet> out{{a.tau, a.scheme, {}}, {b.tau, b.scheme, {}}};
    std::size_t j = 0;
    for (const auto& t : a.trials) {
        while (j < b.trials.size() && b.trials[j].day < t.day)
            ++j;
        if (j < b.trials.size() && b.trials[j].day == t.day) {
            out.first.trials.push_back(t);
            out.second.trials.push_back(b.trials[j]);
        }
    }
    return out;
}

Interval bss_confidence(const TrialSet& scheme, const TrialSet& reference, const BootstrapOptions& options)
{
    if (!(options.level > 0.0 && options.level < 1.0))
        throw Error(ErrorCode::domain, "confidence level must lie in (0, 1)");
    if (options.block_len < 1 || options.replicates < 1)
        throw Error(ErrorCode::domain, "bootstrap needs block_len >= 1 and replicates >= 1");
    const auto [s, r] = align_trials(scheme, reference);
    const std::size_t n = s.size();
    const std::size_t len = options.block_len;
    if (n < len)
        throw Error(ErrorCode::insufficient_data, "bootstrap needs at least one block of " + std::to_string(len) +
                                                      " aligned trials, found " + std::to_string(n));

    // Prefix sums make each block sum O(1).
    std::vector<double> c1(n + 1, 0.0), c2(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        c1[i + 1] = c1[i] + brier(s.trials[i].p, s.trials[i].x);
        c2[i + 1] = c2[i] + brier(r.trials[i].p, r.trials[i].x);
    }
    const std::size_t blocks = (n + len - 1) / len;
    const std::size_t last_len = n - (blocks - 1) * len;

    std::vector<double> stats;
    stats.reserve(options.replicates);
    for (std::size_t rep = 0; rep < options.replicates; ++rep) {
        std::mt19937_64 rng(splitmix64(options.seed ^ splitmix64(rep)));
        std::uniform_int_distribution<std::size_t> start(0, n - len);
        double s1 = 0.0;
        double s2 = 0.0;
        for (std::size_t b = 0; b < blocks; ++b) {
            const std::size_t i0 = start(rng);
            const std::size_t i1 = i0 + (b + 1 == blocks ? last_len : len);
            s1 += c1[i1] - c1[i0];
            s2 += c2[i1] - c2[i0];
        }
        if (s2 > 0.0)
            stats.push_back(1.0 - s1 / s2);
    }
    if (stats.empty())
        throw Error(ErrorCode::undefined_skill, "every bootstrap replicate had a zero reference score");
    std::sort(stats.begin(), stats.end());
    const double tail = 0.5 * (1.0 - options.level);
    return {quantile_type7(stats, tail), quantile_type7(stats, 1.0 - tail)};
}

// --- ROC -------------------------------------------------------------------

int deterministic(double p, double zeta)
{
    return p > zeta ? 1 : 0;
}

RocCurve roc_curve(const TrialSet& trials)
{
    RocCurve curve;
    curve.events = trials.events();
    curve.non_events = trials.size() - curve.events;
    if (curve.events == 0 || curve.non_events == 0)
        throw Error(ErrorCode::degenerate, "ROC curve needs both events and non-events");

    std::vector<Trial> sorted = trials.trials;
    std::stable_sort(sorted.begin(), sorted.end(), [](const Trial& a, const Trial& b) { return a.p > b.p; });

    const auto pos = static_cast<double>(curve.events);
    const auto neg = static_cast<double>(curve.non_events);
    curve.points.push_back({kInf, 0.0, 0.0, 0, 0});
    std::size_t hits = 0;
    std::size_t false_alarms = 0;
    for (std::size_t i = 0; i < sorted.size();) {
        const double v = sorted[i].p;
        for (; i < sorted.size() && sorted[i].p == v; ++i)
            (sorted[i].x == 1 ? hits : false_alarms) += 1;
        // Alarms so far are exactly those with p > next distinct value.
        const double zeta = i < sorted.size() ? sorted[i].p : -kInf;
        curve.points.push_back({zeta, static_cast<double>(false_alarms) / neg, static_cast<double>(hits) / pos,
                                false_alarms, hits});
    }
    return curve;
}

double auc(const RocCurve& curve)
{
    if (curve.events == 0 || curve.non_events == 0 || curve.points.size() < 2)
        throw Error(ErrorCode::degenerate, "AUC of a degenerate ROC curve");
    // Twice the area in units of (events x non-events).
    std::uint64_t twice = 0;
    for (std::size_t k = 1; k < curve.points.size(); ++k) {
        const auto& a = curve.points[k - 1];
        const auto& b = curve.points[k];
        twice += static_cast<std::uint64_t>(b.false_alarms - a.false_alarms) * (a.hits + b.hits);
    }
    return static_cast<double>(twice) /
           (2.0 * static_cast<double>(curve.events) * static_cast<double>(curve.non_events));
}

AucEstimate auc_delong_ci(const TrialSet& trials, double level)
{
    if (!(level > 0.0 && level < 1.0))
        throw Error(ErrorCode::domain, "confidence level must lie in (0, 1)");
    std::vector<double> pos, neg;
    for (const auto& t : trials.trials)
        (t.x == 1 ? pos : neg).push_back(t.p);
    if (pos.size() < 2 || neg.size() < 2)
        throw Error(ErrorCode::degenerate, "DeLong interval needs at least two events and two non-events");
    std::sort(pos.begin(), pos.end());
    std::sort(neg.begin(), neg.end());
    const auto m = static_cast<double>(pos.size());
    const auto n = static_cast<double>(neg.size());

    // Structural components: V10 for events, V01 for non-events.
    const auto placement = [](const std::vector<double>& other, double v, bool count_below) {
        const auto lo = std::lower_bound(other.begin(), other.end(), v);
        const auto hi = std::upper_bound(lo, other.end(), v);
        const auto below = static_cast<double>(lo - other.begin());
        const auto above = static_cast<double>(other.end() - hi);
        const auto ties = static_cast<double>(hi - lo);
        return ((count_below ? below : above) + 0.5 * ties) / static_cast<double>(other.size());
    };
    std::vector<double> v10, v01;
    for (double p : pos)
        v10.push_back(placement(neg, p, true));
    for (double p : neg)
        v01.push_back(placement(pos, p, false));

    AucEstimate est;
    est.auc = sample_mean(v10);
    const double s10 = std::pow(sample_sd(v10), 2);
    const double s01 = std::pow(sample_sd(v01), 2);
    est.variance = s10 / m + s01 / n;
    const double z = normal_quantile(0.5 + 0.5 * level);
    const double half = z * std::sqrt(est.variance);
    est.ci = {std::clamp(est.auc - half, 0.0, 1.0), std::clamp(est.auc + half, 0.0, 1.0)};
    return est;
}

// --- suite -----------------------------------------------------------------

const char* to_string(Scheme scheme) noexcept
{
    switch (scheme) {
    case Scheme::cebr: return "cebr";
    case Scheme::ar1: return "ar1";
    case Scheme::raw_ensemble: return "raw";
    case Scheme::postprocessed_ensemble: return "post";
    }
    return "unknown";
}

std::optional<Scheme> scheme_from_string(std::string_view name)
{
    for (auto s : {Scheme::cebr, Scheme::ar1, Scheme::raw_ensemble, Scheme::postprocessed_ensemble})
        if (name == to_string(s))
            return s;
    return std::nullopt;
}

ForecastSuite::ForecastSuite(SuiteInputs inputs) : inputs_(std::move(inputs))
{
    if (inputs_.train.first > inputs_.train.last || inputs_.test.first > inputs_.test.last)
        throw Error(ErrorCode::domain, "empty train or test window");
    if (inputs_.train.last >= inputs_.test.first)
        throw Error(ErrorCode::domain, "training window " + inputs_.train.to_string() +
                                           " must precede test window " + inputs_.test.to_string());
    train_ = slice_years(inputs_.observations, inputs_.train);
    test_ = slice_years(inputs_.observations, inputs_.test);
    sorted_train_ = train_.present_values();
    if (sorted_train_.empty())
        throw Error(ErrorCode::insufficient_data, "no training observations in " + inputs_.train.to_string());
    std::sort(sorted_train_.begin(), sorted_train_.end());
    ar_ = inputs_.ar ? *inputs_.ar : fit_ar_order(train_, 1);

    if (inputs_.ensemble) {
        inputs_.ensemble->validate();
        for (int y = inputs_.test.first; y <= inputs_.test.last; ++y)
            calibrations_.push_back(calibrate_year(*inputs_.ensemble, inputs_.observations, y, inputs_.calibration));
    }
}

double ForecastSuite::threshold(double q) const
{
    return quantile_type7(sorted_train_, q);
}

CEBRModel ForecastSuite::cebr(double tau) const
{
    return empirical_cebr(train_, tau);
}

std::vector<DayProbability> ForecastSuite::raw_probabilities(double tau) const
{
    if (!inputs_.ensemble)
        throw Error(ErrorCode::domain, "raw ensemble scheme needs an ensemble archive");
    return raw_forecast(*inputs_.ensemble, tau);
}

std::vector<DayProbability> ForecastSuite::postprocessed_probabilities(double tau) const
{
    if (!inputs_.ensemble)
        throw Error(ErrorCode::domain, "post-processed scheme needs an ensemble archive");
    std::vector<DayProbability> out;
    for (const auto& cal : calibrations_) {
        auto year = tailcast::postprocessed_probabilities(*inputs_.ensemble, cal, tau);
        out.insert(out.end(), year.begin(), year.end());
    }
    return out;
}

TrialSet ForecastSuite::trials(Scheme scheme, double tau) const
{
    switch (scheme) {
    case Scheme::cebr: return build_trials(cebr_forecaster(cebr(tau)), test_, tau, to_string(scheme));
    case Scheme::ar1: return build_trials(ar1_forecaster(ar_, tau), test_, tau, to_string(scheme));
    case Scheme::raw_ensemble:
        return build_trials(table_forecaster(raw_probabilities(tau)), test_, tau, to_string(scheme));
    case Scheme::postprocessed_ensemble:
        return build_trials(table_forecaster(postprocessed_probabilities(tau)), test_, tau, to_string(scheme));
    }
    throw Error(ErrorCode::domain, "unknown scheme");
}

std::vector<double> default_q_grid()
{
    std::vector<double> q;
    for (int i = 1; i <= 19; ++i)
        q.push_back(0.05 * i);
    return q;
}

SkillReport threshold_sweep(const ForecastSuite& suite, std::span<const Scheme> schemes, const SweepOptions& options)
{
    SkillReport report;
    for (const auto& cal : suite.calibrations())
        if (cal.skipped)
            report.notes.push_back("post-processed ensemble: year " + std::to_string(cal.year) +
                                   " skipped: " + cal.reason);
        else if (cal.inflation.floored)
            report.notes.push_back("post-processed ensemble: year " + std::to_string(cal.year) + ": " +
                                   cal.inflation.warning);

    const auto& grid = options.q_grid.empty() ? default_q_grid() : options.q_grid;
    for (std::size_t qi = 0; qi < grid.size(); ++qi) {
        const double q = grid[qi];
        const double tau = suite.threshold(q);

        std::optional<TrialSet> reference;
        try {
            reference = suite.trials(Scheme::cebr, tau);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::no_trials)
                throw;
        }

        for (const Scheme scheme : schemes) {
            SkillRow row;
            row.scheme = scheme;
            row.q = q;
            row.tau = tau;
            row.brier = row.bss = row.bss_lo = row.bss_hi = kNaN;
            row.auc = row.auc_lo = row.auc_hi = kNaN;
            if (!reference) {
                row.flags.push_back("no_training_trials");
                report.rows.push_back(std::move(row));
                continue;
            }
            const TrialSet ts = scheme == Scheme::cebr ? *reference : suite.trials(scheme, tau);
            row.n_trials = ts.size();
            row.n_events = ts.events();
            if (ts.empty()) {
                row.flags.push_back("empty");
                report.rows.push_back(std::move(row));
                continue;
            }
            row.brier = mean_brier(ts);
            const std::size_t non_events = row.n_trials - row.n_events;
            if (row.n_events < options.min_events || non_events < options.min_events)
                row.flags.push_back("degenerate");

            const auto [own, ref] = align_trials(ts, *reference);
            if (own.empty()) {
                row.flags.push_back("no_common_days");
            } else {
                const double s1 = mean_brier(own);
                const double s2 = mean_brier(ref);
                if (s2 > 0.0) {
                    row.bss = bss(s1, s2);
                    if (own.size() >= options.bootstrap.block_len) {
                        BootstrapOptions bo = options.bootstrap;
                        bo.seed = splitmix64(options.bootstrap.seed ^
                                             splitmix64(qi * 16 + static_cast<std::uint64_t>(scheme)));
                        try {
                            const auto ci = bss_confidence(own, ref, bo);
                            row.bss_lo = ci.lo;
                            row.bss_hi = ci.hi;
                        } catch (const Error&) {
                            row.flags.push_back("no_bss_ci");
                        }
                    } else {
                        row.flags.push_back("no_bss_ci");
                    }
                } else {
                    row.flags.push_back("undefined_bss");
                }
            }

            if (row.n_events >= 2 && non_events >= 2) {
                const auto a = auc_delong_ci(ts, options.auc_level);
                row.auc = a.auc;
                row.auc_lo = a.ci.lo;
                row.auc_hi = a.ci.hi;
            }
            report.rows.push_back(std::move(row));
        }
    }
    return report;
}

}  // namespace tailcast
