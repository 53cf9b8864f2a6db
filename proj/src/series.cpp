#include "tailcast/series.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <Eigen/Dense>

#include "csv_util.hpp"
#include "tailcast/error.hpp"
#include "tailcast/stats.hpp"

namespace tailcast {

namespace chr = std::chrono;

// --- dates -----------------------------------------------------------------

std::optional<Date> try_parse_date(std::string_view text)
{
    if (const auto t = text.find_first_of("T "); t != std::string_view::npos)
        text = text.substr(0, t);
    int y = 0;
    unsigned m = 0;
    unsigned d = 0;
    char tail = 0;
    const std::string buf(text);
    if (std::sscanf(buf.c_str(), "%5d-%2u-%2u%c", &y, &m, &d, &tail) != 3)
        return std::nullopt;
    const chr::year_month_day ymd{chr::year{y}, chr::month{m}, chr::day{d}};
    if (!ymd.ok())
        return std::nullopt;
    return Date{ymd};
}

Date parse_date(std::string_view text)
{
    if (auto d = try_parse_date(text))
        return *d;
    throw Error(ErrorCode::parse, "invalid ISO-8601 date '" + std::string(text) + "'");
}

std::string format_date(Date date)
{
    const chr::year_month_day ymd{date};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

int year_of(Date date)
{
    return static_cast<int>(chr::year_month_day{date}.year());
}

bool YearRange::contains(Date date) const
{
    return contains(year_of(date));
}

std::string YearRange::to_string() const
{
    return std::to_string(first) + "-" + std::to_string(last);
}

// --- DatedSeries -------------------------------------------------------------

std::size_t DatedSeries::present_count() const
{
    return static_cast<std::size_t>(
        std::count_if(days.begin(), days.end(), [](const DayValue& d) { return d.present; }));
}

std::vector<double> DatedSeries::present_values() const
{
    std::vector<double> out;
    out.reserve(days.size());
    for (const auto& d : days)
        if (d.present)
            out.push_back(d.value);
    return out;
}

std::optional<double> DatedSeries::value_at(Date date) const
{
    const std::int64_t n = index_of(date);
    const auto it = std::lower_bound(days.begin(), days.end(), n,
                                     [](const DayValue& d, std::int64_t k) { return d.day < k; });
    if (it == days.end() || it->day != n || !it->present)
        return std::nullopt;
    return it->value;
}

void DatedSeries::validate() const
{
    for (std::size_t i = 1; i < days.size(); ++i)
        if (days[i].day <= days[i - 1].day)
            throw Error(ErrorCode::structure, "day indices not strictly increasing at " +
                                                  format_date(date_of(days[i].day)));
}

std::size_t longest_present_run(const DatedSeries& series)
{
    std::size_t best = 0;
    std::size_t run = 0;
    std::int64_t prev = 0;
    for (const auto& d : series.days) {
        if (!d.present) {
            run = 0;
            continue;
        }
        run = (run > 0 && d.day == prev + 1) ? run + 1 : 1;
        prev = d.day;
        best = std::max(best, run);
    }
    return best;
}

// --- CSV ingestion -----------------------------------------------------------

using detail::find_column;
using detail::is_missing;
using detail::parse_number;
using detail::split;
using detail::trim;

DailySeries load_daily_series(std::istream& in, const CsvFormat& format)
{
    struct Row {
        Date date;
        std::optional<double> value;
        std::optional<std::int64_t> day_index;
    };
    std::vector<Row> rows;

    std::size_t date_col = 0;
    std::size_t value_col = 1;
    std::optional<std::size_t> index_col;
    bool first = true;
    std::string line;
    std::size_t lineno = 0;

    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty() || trim(line).front() == '#')
            continue;
        const auto fields = split(line, format.delimiter);
        if (first) {
            first = false;
            if (!try_parse_date(fields.front())) {
                const auto d = find_column(fields, format.date_column);
                const auto v = find_column(fields, format.value_column);
                if (!d || !v)
                    throw ParseError(lineno, "header lacks column '" +
                                                 (d ? format.value_column : format.date_column) + "'");
                date_col = *d;
                value_col = *v;
                index_col = find_column(fields, "day_index");
                continue;
            }
        }
        const std::size_t needed = std::max({date_col, value_col, index_col.value_or(0)}) + 1;
        if (fields.size() < needed)
            throw ParseError(lineno, "expected at least " + std::to_string(needed) + " fields");
        const auto date = try_parse_date(fields[date_col]);
        if (!date)
            throw ParseError(lineno, "invalid date '" + fields[date_col] + "'");
        Row row{*date, std::nullopt, std::nullopt};
        if (!is_missing(fields[value_col])) {
            row.value = parse_number(fields[value_col]);
            if (!row.value)
                throw ParseError(lineno, "invalid value '" + fields[value_col] + "'");
        }
        if (index_col) {
            const auto idx = parse_number(fields[*index_col]);
            if (!idx || *idx != std::floor(*idx))
                throw ParseError(lineno, "invalid day_index '" + fields[*index_col] + "'");
            row.day_index = static_cast<std::int64_t>(*idx);
        }
        if (!rows.empty() && row.date <= rows.back().date)
            throw Error(ErrorCode::structure,
                        "line " + std::to_string(lineno) + ": date " + format_date(row.date) +
                            (row.date == rows.back().date ? " duplicated" : " out of order"));
        rows.push_back(row);
    }
    if (rows.empty())
        throw Error(ErrorCode::structure, "no data rows");

    DailySeries series;
    series.epoch = rows.front().date - chr::days{rows.front().day_index.value_or(0)};
    for (const auto& r : rows) {
        const std::int64_t n = series.index_of(r.date);
        if (r.day_index && *r.day_index != n)
            throw Error(ErrorCode::structure, "day_index inconsistent with date " + format_date(r.date));
        // Missing calendar days become absent entries.
        for (std::int64_t k = series.days.empty() ? n : series.days.back().day + 1; k < n; ++k)
            series.days.push_back({k, 0.0, false});
        series.days.push_back({n, r.value.value_or(0.0), r.value.has_value()});
    }
    return series;
}

DailySeries load_daily_series_file(const std::string& path, const CsvFormat& format)
{
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorCode::io, "cannot open '" + path + "'");
    return load_daily_series(in, format);
}

void write_series_csv(std::ostream& out, const DatedSeries& series)
{
    out << "day_index,date,value\n";
    for (const auto& d : series.days) {
        out << d.day << ',' << format_date(series.date_of(d.day)) << ',';
        if (d.present)
            out << detail::format_number(d.value);
        out << '\n';
    }
}

// --- climatology ---------------------------------------------------------

double default_omega()
{
    return 2.0 * kPi / kMeanGregorianYear;
}

std::vector<double> harmonic_regressors(double n, int harmonics, double omega)
{
    std::vector<double> row;
    row.reserve(static_cast<std::size_t>(2 * harmonics + 1));
    row.push_back(1.0);
    for (int k = 1; k <= harmonics; ++k) {
        row.push_back(std::cos(k * omega * n));
        row.push_back(std::sin(k * omega * n));
    }
    return row;
}

double ClimatologyModel::at(double n) const
{
    double c = beta.empty() ? 0.0 : beta[0];
    for (int k = 1; 2 * k < static_cast<int>(beta.size()); ++k) {
        c += beta[2 * k - 1] * std::cos(k * omega * n);
        c += beta[2 * k] * std::sin(k * omega * n);
    }
    return c;
}

double evaluate_climatology(const ClimatologyModel& model, double n)
{
    return model.at(n);
}

ClimatologyModel fit_climatology(const DatedSeries& series, int harmonics,
                                 std::optional<YearRange> window, double omega)
{
    if (harmonics < 0)
        throw Error(ErrorCode::domain, "harmonics must be >= 0");
    const auto m = static_cast<Eigen::Index>(2 * harmonics + 1);

    std::vector<const DayValue*> used;
    for (const auto& d : series.days)
        if (d.present && (!window || window->contains(series.date_of(d.day))))
            used.push_back(&d);
    if (static_cast<Eigen::Index>(used.size()) < 2 * m)
        throw Error(ErrorCode::insufficient_data,
                    "climatology fit needs at least " + std::to_string(2 * m) + " present values, got " +
                        std::to_string(used.size()));

    Eigen::MatrixXd x(static_cast<Eigen::Index>(used.size()), m);
    Eigen::VectorXd y(x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const auto row = harmonic_regressors(static_cast<double>(used[i]->day), harmonics, omega);
        for (Eigen::Index j = 0; j < m; ++j)
            x(i, j) = row[static_cast<std::size_t>(j)];
        y(i) = used[i]->value;
    }

    const Eigen::MatrixXd normal = x.transpose() * x;
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(normal, Eigen::EigenvaluesOnly);
    const double lmin = eig.eigenvalues().minCoeff();
    const double lmax = eig.eigenvalues().maxCoeff();
    if (!(lmin > 0.0) || lmax / lmin > 1e12)
        throw Error(ErrorCode::singular_fit, "harmonic design is rank deficient (condition number " +
                                                 std::to_string(lmin > 0.0 ? lmax / lmin : INFINITY) + ")");
    const Eigen::LLT<Eigen::MatrixXd> llt(normal);
    if (llt.info() != Eigen::Success)
        throw Error(ErrorCode::singular_fit, "Cholesky factorization of the normal equations failed");
    const Eigen::VectorXd beta = llt.solve(x.transpose() * y);

    ClimatologyModel model;
    model.epoch = series.epoch;
    model.omega = omega;
    model.beta.assign(beta.data(), beta.data() + beta.size());
    model.n_used = used.size();

    const Eigen::VectorXd resid = y - x * beta;
    const double dof = static_cast<double>(x.rows() - m);
    const double s2 = resid.squaredNorm() / dof;
    model.residual_sd = std::sqrt(s2);
    const Eigen::MatrixXd cov = llt.solve(Eigen::MatrixXd::Identity(m, m)) * s2;
    for (Eigen::Index j = 0; j < m; ++j)
        model.std_errors.push_back(std::sqrt(cov(j, j)));

    const double span = static_cast<double>(used.back()->day - used.front()->day + 1);
    if (span < 2.0 * kMeanGregorianYear)
        model.warnings.push_back("climatology window spans " + std::to_string(static_cast<long>(span)) +
                                 " days, less than two years");
    return model;
}

DatedSeries climatology_series(const DatedSeries& series, const ClimatologyModel& model)
{
    DatedSeries out;
    out.epoch = series.epoch;
    out.days.reserve(series.days.size());
    for (const auto& d : series.days)
        out.days.push_back({d.day, model.at(series.date_of(d.day)), true});
    return out;
}

AnomalySeries compute_anomalies(const DatedSeries& series, const ClimatologyModel& model)
{
    AnomalySeries out;
    out.epoch = series.epoch;
    out.days.reserve(series.days.size());
    for (const auto& d : series.days)
        out.days.push_back({d.day, d.present ? d.value - model.at(series.date_of(d.day)) : 0.0, d.present});
    return out;
}

DailySeries add_climatology(const DatedSeries& anomalies, const ClimatologyModel& model)
{
    DailySeries out;
    out.epoch = anomalies.epoch;
    out.days.reserve(anomalies.days.size());
    for (const auto& d : anomalies.days)
        out.days.push_back(
            {d.day, d.present ? d.value + model.at(anomalies.date_of(d.day)) : 0.0, d.present});
    return out;
}

// --- descriptive statistics ------------------------------------------------

std::vector<double> autocorrelation(const DatedSeries& anomalies, std::size_t max_lag)
{
    if (longest_present_run(anomalies) < max_lag + 2)
        throw Error(ErrorCode::insufficient_data,
                    "autocorrelation to lag " + std::to_string(max_lag) + " needs " +
                        std::to_string(max_lag + 2) + " contiguous values");
    const auto values = anomalies.present_values();
    const double mean = sample_mean(values);
    const auto n = static_cast<double>(values.size());

    std::vector<double> cov(max_lag + 1, 0.0);
    for (std::size_t k = 0; k <= max_lag; ++k) {
        double s = 0.0;
        for_each_lag_pair(anomalies, k, [&](double a, double b) { s += (a - mean) * (b - mean); });
        cov[k] = s / n;
    }
    if (!(cov[0] > 0.0))
        throw Error(ErrorCode::zero_variance, "autocorrelation of a constant series is undefined");
    std::vector<double> acf(max_lag + 1);
    for (std::size_t k = 0; k <= max_lag; ++k)
        acf[k] = cov[k] / cov[0];
    acf[0] = 1.0;
    return acf;
}

DensityEstimate kde_density(std::span<const double> samples, std::span<const double> grid,
                            std::optional<double> bandwidth)
{
    if (samples.empty())
        throw Error(ErrorCode::insufficient_data, "kernel density estimate needs samples");
    double h = 0.0;
    if (bandwidth) {
        if (!(*bandwidth > 0.0))
            throw Error(ErrorCode::domain, "bandwidth must be positive");
        h = *bandwidth;
    } else {
        if (samples.size() < 2)
            throw Error(ErrorCode::insufficient_data, "automatic bandwidth needs at least two samples");
        h = silverman_width(sample_sd(samples), samples.size());
        if (!(h > 0.0))
            throw Error(ErrorCode::zero_variance, "degenerate bandwidth: samples have zero spread");
    }

    DensityEstimate est;
    est.bandwidth = h;
    est.grid.assign(grid.begin(), grid.end());
    est.density.resize(grid.size());
    const double norm = 1.0 / static_cast<double>(samples.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double s = 0.0;
        for (double x : samples)
            s += normal_pdf(grid[i], x, h);
        est.density[i] = s * norm;
    }
    return est;
}

DensityEstimate kde_density(std::span<const double> samples, std::size_t points)
{
    if (samples.size() < 2)
        throw Error(ErrorCode::insufficient_data, "automatic bandwidth needs at least two samples");
    if (points < 2)
        throw Error(ErrorCode::domain, "density grid needs at least two points");
    const double h = silverman_width(sample_sd(samples), samples.size());
    if (!(h > 0.0))
        throw Error(ErrorCode::zero_variance, "degenerate bandwidth: samples have zero spread");
    const auto [lo, hi] = std::minmax_element(samples.begin(), samples.end());
    const double a = *lo - 3.0 * h;
    const double b = *hi + 3.0 * h;
    std::vector<double> grid(points);
    for (std::size_t i = 0; i < points; ++i)
        grid[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(points - 1);
    return kde_density(samples, grid, h);
}

}  // namespace tailcast
