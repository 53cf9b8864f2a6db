#pragma once

#include <chrono>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tailcast {

using Date = std::chrono::sys_days;

/// Parses YYYY-MM-DD; an optional time part after 'T' or ' ' is ignored.
std::optional<Date> try_parse_date(std::string_view text);
Date parse_date(std::string_view text);
std::string format_date(Date date);
int year_of(Date date);

/// Inclusive calendar-year window.
struct YearRange {
    int first = 0;
    int last = 0;

    bool contains(Date date) const;
    bool contains(int year) const { return year >= first && year <= last; }
    std::string to_string() const;
};

struct DayValue {
    std::int64_t day = 0;  // days since the series epoch
    double value = 0.0;
    bool present = false;
};

/// Dated scalar series. Day indices are strictly increasing; absent entries
/// mark gaps and are never interpolated.
struct DatedSeries {
    Date epoch{};
    std::vector<DayValue> days;

    std::size_t size() const { return days.size(); }
    std::size_t present_count() const;
    Date date_of(std::int64_t day) const { return epoch + std::chrono::days{day}; }
    std::int64_t index_of(Date date) const { return (date - epoch).count(); }
    std::vector<double> present_values() const;

    /// Value on `date`, if that day exists and is present.
    std::optional<double> value_at(Date date) const;

    /// Throws ErrorCode::structure unless day indices strictly increase.
    void validate() const;
};

/// Raw observations, °C.
struct DailySeries : DatedSeries {};

/// Observation minus climatology, °C.
struct AnomalySeries : DatedSeries {};

/// Keeps only entries whose calendar year lies in `window`; day indices and
/// epoch are unchanged.
template <class Series>
Series slice_years(const Series& series, const YearRange& window)
{
    Series out;
    out.epoch = series.epoch;
    for (const auto& d : series.days)
        if (window.contains(series.date_of(d.day)))
            out.days.push_back(d);
    return out;
}

/// Calls fn(x_n, x_{n+lag}) for every pair whose members are both present
/// and exactly `lag` days apart.
template <class Fn>
void for_each_lag_pair(const DatedSeries& series, std::size_t lag, Fn&& fn)
{
    const auto& d = series.days;
    std::size_t j = 0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (!d[i].present)
            continue;
        const std::int64_t target = d[i].day + static_cast<std::int64_t>(lag);
        if (j < i)
            j = i;
        while (j < d.size() && d[j].day < target)
            ++j;
        if (j == d.size())
            break;
        if (d[j].day == target && d[j].present)
            fn(d[i].value, d[j].value);
    }
}

/// Length of the longest run of consecutive present days.
std::size_t longest_present_run(const DatedSeries& series);

// --- ingestion -------------------------------------------------------------

struct CsvFormat {
    char delimiter = ',';
    std::string date_column = "date";
    std::string value_column = "t2m_celsius";
};

/// Reads a delimited date/value table. A header row is optional: when the
/// first field of the first row is a date, columns 0 and 1 are used. Missing
/// values (empty, NA, NaN) and missing dates become absent entries. When a
/// `day_index` column is present the epoch is reconstructed from it.
DailySeries load_daily_series(std::istream& in, const CsvFormat& format = {});
DailySeries load_daily_series_file(const std::string& path, const CsvFormat& format = {});

/// Writes `day_index,date,value`; absent values are left empty.
void write_series_csv(std::ostream& out, const DatedSeries& series);

// --- climatology -----------------------------------------------------------

inline constexpr double kMeanGregorianYear = 365.2425;
double default_omega();

/// c_n = b0 + sum_k [b_{2k-1} cos(k w n) + b_{2k} sin(k w n)], n in days
/// since `epoch`.
struct ClimatologyModel {
    Date epoch{};
    std::vector<double> beta;
    double omega = default_omega();

    // Fit diagnostics; empty for hand-built models.
    std::size_t n_used = 0;
    double residual_sd = 0.0;
    std::vector<double> std_errors;
    std::vector<std::string> warnings;

    int harmonics() const { return static_cast<int>(beta.size() / 2); }
    double at(double n) const;
    double at(Date date) const { return at(static_cast<double>((date - epoch).count())); }
};

double evaluate_climatology(const ClimatologyModel& model, double n);

/// Regressor row [1, cos wn, sin wn, cos 2wn, ...] used by the fit.
std::vector<double> harmonic_regressors(double n, int harmonics, double omega);

/// Least-squares harmonic fit over the present values (optionally restricted
/// to `window`). Normal equations are solved with a Cholesky factorization
/// after a condition-number check (ErrorCode::singular_fit above 1e12).
ClimatologyModel fit_climatology(const DatedSeries& series, int harmonics = 2,
                                 std::optional<YearRange> window = std::nullopt,
                                 double omega = default_omega());

/// Samples the model on every day of `series` (all entries present).
DatedSeries climatology_series(const DatedSeries& series, const ClimatologyModel& model);

AnomalySeries compute_anomalies(const DatedSeries& series, const ClimatologyModel& model);
DailySeries add_climatology(const DatedSeries& anomalies, const ClimatologyModel& model);

// --- descriptive statistics ------------------------------------------------

/// Sample autocorrelation for lags 0..max_lag. The series is demeaned and
/// each lag sum is divided by the present count N (biased estimator), then
/// by the lag-0 value; only pairs with both members present contribute.
std::vector<double> autocorrelation(const DatedSeries& anomalies, std::size_t max_lag);

struct DensityEstimate {
    std::vector<double> grid;
    std::vector<double> density;
    double bandwidth = 0.0;
};

/// Gaussian KDE. Without an explicit bandwidth, Silverman's rule with
/// K = sample count is used.
DensityEstimate kde_density(std::span<const double> samples, std::span<const double> grid,
                            std::optional<double> bandwidth = std::nullopt);

/// KDE on the default grid: `points` evenly spaced over [min - 3h, max + 3h].
DensityEstimate kde_density(std::span<const double> samples, std::size_t points = 512);

}  // namespace tailcast
