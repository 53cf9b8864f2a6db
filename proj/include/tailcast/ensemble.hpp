#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tailcast/series.hpp"
#include "tailcast/stats.hpp"

namespace tailcast {

// --- archive ---------------------------------------------------------------

struct EnsembleDay {
    std::int64_t day = 0;  // target day, days since the archive epoch
    std::vector<double> members;
};

/// K-member forecasts for consecutive target days at one grid point. Member
/// order carries no meaning.
struct EnsembleSeries {
    Date epoch{};
    int lead_hours = 36;
    std::vector<EnsembleDay> days;

    std::size_t members() const { return days.empty() ? 0 : days.front().members.size(); }
    Date date_of(std::int64_t day) const { return epoch + std::chrono::days{day}; }
    /// Initialization time in hours since the epoch, for a 12 UTC target.
    std::int64_t init_hours(const EnsembleDay& d) const { return d.day * 24 + 12 - lead_hours; }
    const EnsembleDay* find(Date target) const;

    /// Throws ErrorCode::structure unless K >= 2 is constant and days
    /// strictly increase.
    void validate() const;
};

/// Regular latitude/longitude grid.
struct GridSpec {
    double lat0 = 0.0;
    double lon0 = 0.0;
    double dlat = 2.5;
    double dlon = 2.5;
    int nlat = 1;
    int nlon = 1;

    double lat(int i) const { return lat0 + dlat * i; }
    double lon(int j) const { return lon0 + dlon * j; }
};

struct GridIndex {
    int lat = 0;
    int lon = 0;
    bool operator==(const GridIndex&) const = default;
};

/// Nearest node along each axis independently; an exact midpoint resolves to
/// the lower index. Longitudes are taken in the grid's own convention.
GridIndex nearest_grid_point(double lat, double lon, const GridSpec& grid);

struct Site {
    double lat = 0.0;
    double lon = 0.0;
};

/// Reads `target_date,lead_hours,member_index,t2m_celsius` rows (one per
/// member and day). When `lat` and `lon` columns are present the grid is
/// inferred from them and only the node nearest to `site` is kept.
EnsembleSeries load_ensemble_csv(std::istream& in, std::optional<Site> site = std::nullopt);
EnsembleSeries load_ensemble_csv_file(const std::string& path, std::optional<Site> site = std::nullopt);
void write_ensemble_csv(std::ostream& out, const EnsembleSeries& ens);

// --- dressing ------------------------------------------------------------

/// e_i - c_n for every member of every target day.
EnsembleSeries ensemble_anomalies(const EnsembleSeries& ens, const ClimatologyModel& clim);

/// (1/K) sum_i [1 - Phi_{e_i, width}(tau)]. Requires width > 0.
double dressed_exceedance_prob(std::span<const double> members, double kernel_width, double tau);

struct DayProbability {
    Date target;
    double p = 0.0;
};

/// Raw scheme: each day's members dressed with Silverman's width computed
/// from that day's ensemble standard deviation. A zero-spread day falls back
/// to the member fraction above tau (ties count one half).
std::vector<DayProbability> raw_forecast(const EnsembleSeries& anomalies, double tau);

// --- calibration ---------------------------------------------------------

struct BiasModel {
    ClimatologyModel harmonic;  // same harmonic structure as the climatology
    YearRange window;

    double at(Date date) const { return harmonic.at(date); }
};

/// Harmonic least-squares fit to the daily (ensemble mean - verification)
/// over `window`. `obs` must be in the same space as the ensemble (both
/// temperatures or both anomalies). Needs at least 180 paired days.
BiasModel fit_seasonal_bias(const EnsembleSeries& ens, const DatedSeries& obs, const YearRange& window,
                            int harmonics = 2);

/// Shifts every member on day n by -bias(n); spread is untouched.
EnsembleSeries apply_bias_correction(const EnsembleSeries& ens, const BiasModel& bias);

struct InflationStats {
    double d2bar = 0.0;    // mean squared (ensemble mean - verification)
    double s2bar = 0.0;    // mean ensemble variance (K - 1 denominator)
    std::size_t members = 0;
    double sigma_k2 = 0.0;
    bool floored = false;
    std::size_t days = 0;  // calibration days contributing
    std::string warning;
};

inline constexpr double kKernelWidthFloor = 0.05;  // °C

/// sigma_k^2 = d2bar - (1 + 1/K) s2bar, floored at kKernelWidthFloor^2 with a
/// warning when the raw value falls below the floor.
InflationStats wang_kernel_width(double d2bar, double s2bar, std::size_t members);

/// Measures d2bar and s2bar over the paired days of `window` and applies
/// wang_kernel_width.
InflationStats measure_inflation(const EnsembleSeries& ens, const DatedSeries& obs, const YearRange& window);

struct CalibrationOptions {
    int harmonics = 2;
    std::size_t min_days_per_year = 180;
};

/// Calibration for forecasts targeting one calendar year, fitted on the two
/// complete calendar years before it.
struct YearCalibration {
    int year = 0;
    bool skipped = false;
    std::string reason;
    std::optional<BiasModel> bias;
    InflationStats inflation;
};

YearCalibration calibrate_year(const EnsembleSeries& ens, const DatedSeries& obs, int target_year,
                               const CalibrationOptions& options = {});

/// Bias-corrected, Wang-width dressed probabilities for the target days of
/// `calibration.year`. Empty when the calibration was skipped.
std::vector<DayProbability> postprocessed_probabilities(const EnsembleSeries& ens,
                                                        const YearCalibration& calibration, double tau);

struct YearForecast {
    YearCalibration calibration;
    std::vector<DayProbability> probabilities;
};

YearForecast postprocessed_forecast(const EnsembleSeries& ens, const DatedSeries& obs, int target_year,
                                    double tau, const CalibrationOptions& options = {});

// --- synthetic archives ----------------------------------------------------

struct SyntheticEnsembleOptions {
    std::size_t members = 15;
    int lead_hours = 36;
    /// Fraction of the one-step innovation variance known to the ensemble;
    /// 0 reproduces the AR(1) predictive distribution.
    double explained_variance = 0.5;
    double bias_offset = 0.0;       // °C
    double bias_amplitude = 0.0;    // °C, annual cosine
    double bias_phase = 0.0;        // rad
    double spread_factor = 1.0;     // member deviations scaled about the mean
};

/// Ensemble for every target day whose truth and predecessor are present.
/// Before the injected errors, truth and members are exchangeable draws
/// from the same conditional Gaussian, so the ensemble is calibrated.
EnsembleSeries synthesize_ensemble(const AnomalySeries& truth, double alpha, double sigma,
                                   const SyntheticEnsembleOptions& options, std::uint64_t seed);

}  // namespace tailcast
