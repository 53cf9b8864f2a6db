#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tailcast/ar.hpp"
#include "tailcast/cebr.hpp"
#include "tailcast/ensemble.hpp"
#include "tailcast/series.hpp"

namespace tailcast {

// --- trials ----------------------------------------------------------------

struct Trial {
    std::int64_t day = 0;  // forecast day n, series day index
    double p = 0.0;        // forecast probability of T_{n+1} > tau
    int x = 0;             // outcome [T_{n+1} > tau]
};

struct TrialSet {
    double tau = 0.0;
    std::string scheme;
    std::vector<Trial> trials;

    bool empty() const { return trials.empty(); }
    std::size_t size() const { return trials.size(); }
    std::size_t events() const;
};

/// Probability for T_{n+1} > tau given the series day n and T_n, or nullopt
/// when the scheme issues no forecast that day.
using Forecaster = std::function<std::optional<double>(Date day, double t_now)>;

Forecaster cebr_forecaster(const CEBRModel& model);
Forecaster ar1_forecaster(const ARModel& model, double tau);
/// Looks up the probability stored for target date n + 1.
Forecaster table_forecaster(std::vector<DayProbability> table);

/// One trial per present day with T_n <= tau whose successor is present.
/// The result may be empty; callers decide how to treat that.
TrialSet build_trials(const Forecaster& forecaster, const AnomalySeries& test, double tau,
                      std::string scheme = {});

// --- scores ----------------------------------------------------------------

/// (x - p)^2; throws ErrorCode::domain outside p in [0,1], x in {0,1}.
double brier(double p, int x);
double mean_brier(const TrialSet& trials);

/// 1 - s1 / s2; throws ErrorCode::undefined_skill when s2 <= 0.
double bss(double mean_s1, double mean_s2);

/// Restricts both sets to their common forecast days.
std::pair<TrialSet, TrialSet> align_trials(const TrialSet& a, const TrialSet& b);

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

struct BootstrapOptions {
    double level = 0.95;
    std::size_t block_len = 10;
    std::size_t replicates = 2000;
    std::uint64_t seed = 0;
};

/// Percentile interval for the BSS of `scheme` against `reference` by a
/// paired moving-block bootstrap over the aligned trial sequence. Each
/// replicate draws its own generator from (seed, replicate index).
Interval bss_confidence(const TrialSet& scheme, const TrialSet& reference, const BootstrapOptions& options = {});

// --- ROC -------------------------------------------------------------------

/// Alarm rule Y = [p > zeta] (strict).
int deterministic(double p, double zeta);

struct RocPoint {
    double zeta = 0.0;             // +inf for the first point, -inf for the last
    double false_alarm_rate = 0.0; // F
    double hit_rate = 0.0;         // H
    std::size_t false_alarms = 0;
    std::size_t hits = 0;
};

struct RocCurve {
    std::vector<RocPoint> points;
    std::size_t events = 0;
    std::size_t non_events = 0;
};

/// Sweep over the distinct forecast values in descending order; one point
/// per distinct value so tied trials produce a single diagonal segment.
/// Throws ErrorCode::degenerate without both classes.
RocCurve roc_curve(const TrialSet& trials);

/// Trapezoidal area, computed from the integer counts.
double auc(const RocCurve& curve);

struct AucEstimate {
    double auc = 0.0;
    double variance = 0.0;
    Interval ci;
};

/// Mann-Whitney AUC (ties count one half) with the DeLong variance and a
/// normal interval clipped to [0,1]. Needs at least two events and two
/// non-events.
AucEstimate auc_delong_ci(const TrialSet& trials, double level = 0.95);

// --- threshold sweep -------------------------------------------------------

enum class Scheme { cebr, ar1, raw_ensemble, postprocessed_ensemble };

const char* to_string(Scheme scheme) noexcept;
std::optional<Scheme> scheme_from_string(std::string_view name);

struct SuiteInputs {
    AnomalySeries observations;  // full record, anomaly space
    YearRange train;
    YearRange test;
    /// AR(1) model used by Scheme::ar1; fitted on the training window when unset.
    std::optional<ARModel> ar;
    /// Ensemble anomalies; required for the ensemble schemes.
    std::optional<EnsembleSeries> ensemble;
    CalibrationOptions calibration;
};

/// Trained forecasting schemes over a fixed train/test split. Calibration
/// of the post-processed ensemble is computed once per test year.
class ForecastSuite {
public:
    explicit ForecastSuite(SuiteInputs inputs);

    const SuiteInputs& inputs() const { return inputs_; }
    const AnomalySeries& training() const { return train_; }
    const AnomalySeries& testing() const { return test_; }
    const ARModel& ar_model() const { return ar_; }
    const std::vector<YearCalibration>& calibrations() const { return calibrations_; }

    /// Type-7 empirical quantile of the training anomalies.
    double threshold(double q) const;

    /// Throws ErrorCode::no_trials when tau lies below all training data.
    CEBRModel cebr(double tau) const;

    /// Test-window trials of one scheme at threshold tau.
    TrialSet trials(Scheme scheme, double tau) const;

    std::vector<DayProbability> raw_probabilities(double tau) const;
    std::vector<DayProbability> postprocessed_probabilities(double tau) const;

private:
    SuiteInputs inputs_;
    AnomalySeries train_;
    AnomalySeries test_;
    std::vector<double> sorted_train_;
    ARModel ar_;
    std::vector<YearCalibration> calibrations_;
};

struct SweepOptions {
    std::vector<double> q_grid;
    BootstrapOptions bootstrap;
    double auc_level = 0.95;
    /// Rows with fewer events or non-events than this are flagged degenerate.
    std::size_t min_events = 10;
};

std::vector<double> default_q_grid();  // 0.05, 0.10, ..., 0.95

struct SkillRow {
    Scheme scheme = Scheme::cebr;
    double q = 0.0;
    double tau = 0.0;
    std::size_t n_trials = 0;
    std::size_t n_events = 0;
    double brier = 0.0;  // NaN where not computable
    double bss = 0.0;
    double bss_lo = 0.0;
    double bss_hi = 0.0;
    double auc = 0.0;
    double auc_lo = 0.0;
    double auc_hi = 0.0;
    std::vector<std::string> flags;
};

struct SkillReport {
    std::vector<SkillRow> rows;
    std::vector<std::string> notes;
};

/// For each q: tau from the training quantile, trials per scheme on the test
/// window, BSS against the CEBR on common days with a block-bootstrap
/// interval, AUC with a DeLong interval. Problem cells are flagged rather
/// than dropped; uncomputable numbers are NaN.
SkillReport threshold_sweep(const ForecastSuite& suite, std::span<const Scheme> schemes,
                            const SweepOptions& options);

}  // namespace tailcast
