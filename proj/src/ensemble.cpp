#include "tailcast/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <set>

#include "csv_util.hpp"
#include "tailcast/error.hpp"

namespace tailcast {

// --- archive ---------------------------------------------------------------

const EnsembleDay* EnsembleSeries::find(Date target) const
{
    const std::int64_t n = (target - epoch).count();
    const auto it = std::lower_bound(days.begin(), days.end(), n,
                                     [](const EnsembleDay& d, std::int64_t k) { return d.day < k; });
    return (it != days.end() && it->day == n) ? &*it : nullptr;
}

void EnsembleSeries::validate() const
{
    const std::size_t k = members();
    if (!days.empty() && k < 2)
        throw Error(ErrorCode::structure, "ensemble needs at least two members");
    for (std::size_t i = 0; i < days.size(); ++i) {
        if (days[i].members.size() != k)
            throw Error(ErrorCode::structure, "member count changes on " + format_date(date_of(days[i].day)));
        if (i > 0 && days[i].day <= days[i - 1].day)
            throw Error(ErrorCode::structure, "ensemble target days not strictly increasing");
    }
}

GridIndex nearest_grid_point(double lat, double lon, const GridSpec& grid)
{
    const auto nearest = [](double x, double x0, double dx, int n) {
        // ceil(u - 1/2) rounds an exact midpoint down.
        const double u = (x - x0) / dx;
        const int i = static_cast<int>(std::ceil(u - 0.5 - 1e-9));
        return std::clamp(i, 0, n - 1);
    };
    return {nearest(lat, grid.lat0, grid.dlat, grid.nlat), nearest(lon, grid.lon0, grid.dlon, grid.nlon)};
}

namespace {

// Regular axis through the sorted distinct coordinate values.
void infer_axis(const std::set<double>& values, double& x0, double& dx, int& n, const char* name)
{
    x0 = *values.begin();
    n = static_cast<int>(values.size());
    dx = n > 1 ? (*values.rbegin() - x0) / (n - 1) : 1.0;
    int i = 0;
    for (double v : values) {
        if (std::abs(v - (x0 + dx * i)) > 1e-6)
            throw Error(ErrorCode::structure, std::string("irregular ") + name + " spacing in gridded ensemble");
        ++i;
    }
}

}  // namespace

EnsembleSeries load_ensemble_csv(std::istream& in, std::optional<Site> site)
{
    struct Row {
        Date date;
        int lead;
        int member;
        double value;
        double lat;
        double lon;
    };
    std::vector<Row> rows;
    std::string line;
    std::size_t lineno = 0;
    std::optional<std::vector<std::string>> header;
    std::size_t c_date = 0, c_lead = 1, c_member = 2, c_value = 3;
    std::optional<std::size_t> c_lat, c_lon;

    while (std::getline(in, line)) {
        ++lineno;
        if (detail::trim(line).empty() || detail::trim(line).front() == '#')
            continue;
        const auto f = detail::split(line, ',');
        if (!header) {
            header = f;
            const auto need = [&](const char* name) {
                const auto c = detail::find_column(f, name);
                if (!c)
                    throw ParseError(lineno, std::string("ensemble header lacks column '") + name + "'");
                return *c;
            };
            c_date = need("target_date");
            c_lead = need("lead_hours");
            c_member = need("member_index");
            c_value = need("t2m_celsius");
            c_lat = detail::find_column(f, "lat");
            c_lon = detail::find_column(f, "lon");
            if (c_lat.has_value() != c_lon.has_value())
                throw ParseError(lineno, "gridded ensemble needs both lat and lon columns");
            continue;
        }
        const std::size_t width = std::max({c_date, c_lead, c_member, c_value, c_lat.value_or(0), c_lon.value_or(0)}) + 1;
        if (f.size() < width)
            throw ParseError(lineno, "expected at least " + std::to_string(width) + " fields");
        const auto date = try_parse_date(f[c_date]);
        const auto lead = detail::parse_number(f[c_lead]);
        const auto member = detail::parse_number(f[c_member]);
        const auto value = detail::parse_number(f[c_value]);
        if (!date)
            throw ParseError(lineno, "invalid target_date '" + f[c_date] + "'");
        if (!lead || !member || !value)
            throw ParseError(lineno, "invalid numeric field");
        Row r{*date, static_cast<int>(*lead), static_cast<int>(*member), *value, 0.0, 0.0};
        if (c_lat) {
            const auto la = detail::parse_number(f[*c_lat]);
            const auto lo = detail::parse_number(f[*c_lon]);
            if (!la || !lo)
                throw ParseError(lineno, "invalid lat/lon");
            r.lat = *la;
            r.lon = *lo;
        }
        rows.push_back(r);
    }
    if (rows.empty())
        throw Error(ErrorCode::structure, "ensemble archive has no rows");

    if (c_lat) {
        std::set<double> lats, lons;
        for (const auto& r : rows) {
            lats.insert(r.lat);
            lons.insert(r.lon);
        }
        GridSpec grid;
        infer_axis(lats, grid.lat0, grid.dlat, grid.nlat, "latitude");
        infer_axis(lons, grid.lon0, grid.dlon, grid.nlon, "longitude");
        if (!site && (grid.nlat > 1 || grid.nlon > 1))
            throw Error(ErrorCode::domain, "gridded ensemble requires a site location");
        const GridIndex node = site ? nearest_grid_point(site->lat, site->lon, grid) : GridIndex{};
        const double la = grid.lat(node.lat);
        const double lo = grid.lon(node.lon);
        std::erase_if(rows, [&](const Row& r) { return std::abs(r.lat - la) > 1e-6 || std::abs(r.lon - lo) > 1e-6; });
    }

    std::map<Date, std::map<int, double>> by_day;
    const int lead = rows.front().lead;
    for (const auto& r : rows) {
        if (r.lead != lead)
            throw Error(ErrorCode::structure, "archive mixes lead times " + std::to_string(lead) + " and " +
                                                  std::to_string(r.lead));
        if (!by_day[r.date].emplace(r.member, r.value).second)
            throw Error(ErrorCode::structure, "duplicate member " + std::to_string(r.member) + " on " +
                                                  format_date(r.date));
    }

    EnsembleSeries ens;
    ens.epoch = by_day.begin()->first;
    ens.lead_hours = lead;
    for (const auto& [date, members] : by_day) {
        EnsembleDay d;
        d.day = (date - ens.epoch).count();
        for (const auto& [idx, v] : members)
            d.members.push_back(v);
        ens.days.push_back(std::move(d));
    }
    ens.validate();
    return ens;
}

EnsembleSeries load_ensemble_csv_file(const std::string& path, std::optional<Site> site)
{
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorCode::io, "cannot open '" + path + "'");
    return load_ensemble_csv(in, site);
}

void write_ensemble_csv(std::ostream& out, const EnsembleSeries& ens)
{
    out << "target_date,lead_hours,member_index,t2m_celsius\n";
    for (const auto& d : ens.days) {
        const std::string date = format_date(ens.date_of(d.day));
        for (std::size_t i = 0; i < d.members.size(); ++i)
            out << date << ',' << ens.lead_hours << ',' << i << ',' << detail::format_number(d.members[i]) << '\n';
    }
}

// --- dressing ------------------------------------------------------------

EnsembleSeries ensemble_anomalies(const EnsembleSeries& ens, const ClimatologyModel& clim)
{
    EnsembleSeries out = ens;
    for (auto& d : out.days) {
        const double c = clim.at(ens.date_of(d.day));
        for (double& m : d.members)
            m -= c;
    }
    return out;
}

double dressed_exceedance_prob(std::span<const double> members, double kernel_width, double tau)
{
    if (!(kernel_width > 0.0))
        throw Error(ErrorCode::domain, "dressing kernel width must be positive");
    if (members.empty())
        throw Error(ErrorCode::domain, "dressing needs at least one member");
    double s = 0.0;
    for (double e : members)
        s += normal_sf(tau, e, kernel_width);
    return s / static_cast<double>(members.size());
}

std::vector<DayProbability> raw_forecast(const EnsembleSeries& anomalies, double tau)
{
    std::vector<DayProbability> out;
    out.reserve(anomalies.days.size());
    for (const auto& d : anomalies.days) {
        const double width = silverman_width(sample_sd(d.members), d.members.size());
        double p = 0.0;
        if (width > 0.0) {
            p = dressed_exceedance_prob(d.members, width, tau);
        } else {
            for (double e : d.members)
                p += e > tau ? 1.0 : (e == tau ? 0.5 : 0.0);
            p /= static_cast<double>(d.members.size());
        }
        out.push_back({anomalies.date_of(d.day), p});
    }
    return out;
}

// --- calibration ---------------------------------------------------------

namespace {

struct Paired {
    Date date;
    const EnsembleDay* day;
    double obs;
};

std::vector<Paired> paired_days(const EnsembleSeries& ens, const DatedSeries& obs, const YearRange& window)
{
    std::vector<Paired> out;
    for (const auto& d : ens.days) {
        const Date date = ens.date_of(d.day);
        if (!window.contains(date))
            continue;
        if (const auto v = obs.value_at(date))
            out.push_back({date, &d, *v});
    }
    return out;
}

}  // namespace

BiasModel fit_seasonal_bias(const EnsembleSeries& ens, const DatedSeries& obs, const YearRange& window,
                            int harmonics)
{
    const auto pairs = paired_days(ens, obs, window);
    if (pairs.size() < 180)
        throw Error(ErrorCode::insufficient_data, "seasonal bias fit needs 180 paired days in " +
                                                      window.to_string() + ", found " +
                                                      std::to_string(pairs.size()));
    DatedSeries bias;
    bias.epoch = ens.epoch;
    for (const auto& p : pairs)
        bias.days.push_back({p.day->day, sample_mean(p.day->members) - p.obs, true});
    return {fit_climatology(bias, harmonics), window};
}

EnsembleSeries apply_bias_correction(const EnsembleSeries& ens, const BiasModel& bias)
{
    EnsembleSeries out = ens;
    for (auto& d : out.days) {
        const double b = bias.at(ens.date_of(d.day));
        for (double& m : d.members)
            m -= b;
    }
    return out;
}

InflationStats wang_kernel_width(double d2bar, double s2bar, std::size_t members)
{
    if (members < 2)
        throw Error(ErrorCode::domain, "kernel width needs at least two members");
    if (!(d2bar >= 0.0) || !(s2bar >= 0.0))
        throw Error(ErrorCode::domain, "d2bar and s2bar must be non-negative");
    InflationStats st;
    st.d2bar = d2bar;
    st.s2bar = s2bar;
    st.members = members;
    const double raw = d2bar - (1.0 + 1.0 / static_cast<double>(members)) * s2bar;
    constexpr double floor = kKernelWidthFloor * kKernelWidthFloor;
    if (raw < floor) {
        st.sigma_k2 = floor;
        st.floored = true;
        st.warning = "kernel variance " + std::to_string(raw) + " below floor; ensemble is not underdispersive";
    } else {
        st.sigma_k2 = raw;
    }
    return st;
}

InflationStats measure_inflation(const EnsembleSeries& ens, const DatedSeries& obs, const YearRange& window)
{
    const auto pairs = paired_days(ens, obs, window);
    if (pairs.empty())
        throw Error(ErrorCode::insufficient_data, "no paired days for inflation statistics in " + window.to_string());
    double d2 = 0.0;
    double s2 = 0.0;
    for (const auto& p : pairs) {
        const double diff = sample_mean(p.day->members) - p.obs;
        const double sd = sample_sd(p.day->members);
        d2 += diff * diff;
        s2 += sd * sd;
    }
    const auto n = static_cast<double>(pairs.size());
    auto st = wang_kernel_width(d2 / n, s2 / n, ens.members());
    st.days = pairs.size();
    return st;
}

YearCalibration calibrate_year(const EnsembleSeries& ens, const DatedSeries& obs, int target_year,
                               const CalibrationOptions& options)
{
    YearCalibration cal;
    cal.year = target_year;
    const YearRange window{target_year - 2, target_year - 1};
    for (int y = window.first; y <= window.last; ++y) {
        const auto n = paired_days(ens, obs, {y, y}).size();
        if (n < options.min_days_per_year) {
            cal.skipped = true;
            cal.reason = "calibration year " + std::to_string(y) + " has " + std::to_string(n) +
                         " paired days (need " + std::to_string(options.min_days_per_year) + ")";
            return cal;
        }
    }
    cal.bias = fit_seasonal_bias(ens, obs, window, options.harmonics);
    const auto corrected = apply_bias_correction(ens, *cal.bias);
    cal.inflation = measure_inflation(corrected, obs, window);
    return cal;
}

std::vector<DayProbability> postprocessed_probabilities(const EnsembleSeries& ens,
                                                        const YearCalibration& calibration, double tau)
{
    std::vector<DayProbability> out;
    if (calibration.skipped || !calibration.bias)
        return out;
    const double width = std::sqrt(calibration.inflation.sigma_k2);
    std::vector<double> shifted;
    for (const auto& d : ens.days) {
        const Date date = ens.date_of(d.day);
        if (year_of(date) != calibration.year)
            continue;
        const double b = calibration.bias->at(date);
        shifted.assign(d.members.begin(), d.members.end());
        for (double& m : shifted)
            m -= b;
        out.push_back({date, dressed_exceedance_prob(shifted, width, tau)});
    }
    return out;
}

YearForecast postprocessed_forecast(const EnsembleSeries& ens, const DatedSeries& obs, int target_year,
                                    double tau, const CalibrationOptions& options)
{
    YearForecast f;
    f.calibration = calibrate_year(ens, obs, target_year, options);
    f.probabilities = postprocessed_probabilities(ens, f.calibration, tau);
    return f;
}

// --- synthetic archives ----------------------------------------------------

EnsembleSeries synthesize_ensemble(const AnomalySeries& truth, double alpha, double sigma,
                                   const SyntheticEnsembleOptions& options, std::uint64_t seed)
{
    const double a = options.explained_variance;
    if (!(a >= 0.0 && a < 1.0))
        throw Error(ErrorCode::domain, "explained_variance must lie in [0, 1)");
    if (options.members < 2)
        throw Error(ErrorCode::domain, "synthetic ensemble needs at least two members");
    if (!(sigma > 0.0) || !(options.spread_factor >= 0.0))
        throw Error(ErrorCode::domain, "sigma must be positive and spread_factor non-negative");

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> stdnorm(0.0, 1.0);
    // Known part k = a eps + sqrt(a - a^2) u leaves eps - k independent of k
    // with variance (1 - a) sigma^2.
    const double b = std::sqrt(a - a * a);
    const double resid_sd = std::sqrt(1.0 - a) * sigma;
    const double omega = default_omega();

    EnsembleSeries ens;
    ens.epoch = truth.epoch;
    ens.lead_hours = options.lead_hours;
    const auto& d = truth.days;
    for (std::size_t i = 1; i < d.size(); ++i) {
        if (!d[i].present || !d[i - 1].present || d[i].day != d[i - 1].day + 1)
            continue;
        const double eps = d[i].value - alpha * d[i - 1].value;
        const double centre = alpha * d[i - 1].value + a * eps + b * sigma * stdnorm(rng);
        EnsembleDay day;
        day.day = d[i].day;
        day.members.resize(options.members);
        for (double& m : day.members)
            m = centre + resid_sd * stdnorm(rng);
        const double mean = sample_mean(day.members);
        const double bias =
            options.bias_offset + options.bias_amplitude * std::cos(omega * static_cast<double>(d[i].day) + options.bias_phase);
        for (double& m : day.members)
            m = mean + options.spread_factor * (m - mean) + bias;
        ens.days.push_back(std::move(day));
    }
    return ens;
}

}  // namespace tailcast
