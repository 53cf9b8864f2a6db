#include <cmath>
#include <limits>
#include <vector>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "tailcast/ar.hpp"
#include "tailcast/cebr.hpp"
#include "tailcast/cli.hpp"
#include "tailcast/ensemble.hpp"
#include "tailcast/error.hpp"
#include "tailcast/io.hpp"
#include "tailcast/series.hpp"
#include "tailcast/theory.hpp"
#include "tailcast/verify.hpp"

namespace py = pybind11;
using namespace tailcast;

namespace {

// Python sees one series type; absent days are NaN.
DatedSeries series_from_values(const std::string& start, const std::vector<double>& values)
{
    DatedSeries s;
    s.epoch = parse_date(start);
    for (std::size_t i = 0; i < values.size(); ++i)
        s.days.push_back({static_cast<std::int64_t>(i), values[i], !std::isnan(values[i])});
    return s;
}

std::vector<double> series_values(const DatedSeries& s)
{
    std::vector<double> out;
    for (const auto& d : s.days)
        out.push_back(d.present ? d.value : std::numeric_limits<double>::quiet_NaN());
    return out;
}

std::vector<std::string> series_dates(const DatedSeries& s)
{
    std::vector<std::string> out;
    for (const auto& d : s.days)
        out.push_back(format_date(s.date_of(d.day)));
    return out;
}

AnomalySeries as_anomalies(const DatedSeries& s)
{
    AnomalySeries a;
    static_cast<DatedSeries&>(a) = s;
    return a;
}

TrialSet trial_set(const std::vector<double>& p, const std::vector<int>& x)
{
    if (p.size() != x.size())
        throw Error(ErrorCode::domain, "p and x must have the same length");
    TrialSet t;
    for (std::size_t i = 0; i < p.size(); ++i)
        t.trials.push_back({static_cast<std::int64_t>(i), p[i], x[i]});
    return t;
}

py::tuple estimate(const Estimate& e)
{
    return py::make_tuple(e.value, e.abs_error);
}

std::optional<YearRange> window_arg(const std::optional<std::pair<int, int>>& w)
{
    if (!w)
        return std::nullopt;
    return YearRange{w->first, w->second};
}

}  // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "tailcast native core";

    static py::exception<Error> error(m, "TailcastError", PyExc_RuntimeError);
    py::register_exception_translator([](std::exception_ptr ptr) {
        try {
            if (ptr)
                std::rethrow_exception(ptr);
        } catch (const Error& e) {
            const std::string msg = std::string(to_string(e.code())) + ": " + e.what();
            PyErr_SetString(error.ptr(), msg.c_str());
        }
    });

    py::class_<DatedSeries>(m, "Series")
        .def(py::init(&series_from_values), py::arg("start"), py::arg("values"))
        .def_property_readonly("start", [](const DatedSeries& s) { return format_date(s.date_of(s.days.empty() ? 0 : s.days.front().day)); })
        .def_property_readonly("values", &series_values)
        .def_property_readonly("dates", &series_dates)
        .def("present_count", &DatedSeries::present_count)
        .def("__len__", &DatedSeries::size);

    m.def("load_series", [](const std::string& path, char delimiter, const std::string& date_column,
                            const std::string& value_column) -> DatedSeries {
        return load_daily_series_file(path, {delimiter, date_column, value_column});
    }, py::arg("path"), py::arg("delimiter") = ',', py::arg("date_column") = "date",
          py::arg("value_column") = "t2m_celsius");

    py::class_<ClimatologyModel>(m, "Climatology")
        .def_readonly("beta", &ClimatologyModel::beta)
        .def_readonly("std_errors", &ClimatologyModel::std_errors)
        .def_readonly("residual_sd", &ClimatologyModel::residual_sd)
        .def_readonly("n_used", &ClimatologyModel::n_used)
        .def_readonly("warnings", &ClimatologyModel::warnings)
        .def("at", [](const ClimatologyModel& c, const std::string& date) { return c.at(parse_date(date)); })
        .def("to_json", [](const ClimatologyModel& c) { return to_json(c).dump(); });

    m.def("fit_climatology", [](const DatedSeries& s, int harmonics, std::optional<std::pair<int, int>> window) {
        return fit_climatology(s, harmonics, window_arg(window));
    }, py::arg("series"), py::arg("harmonics") = 2, py::arg("window") = py::none());
    m.def("compute_anomalies", [](const DatedSeries& s, const ClimatologyModel& c) -> DatedSeries {
        return compute_anomalies(s, c);
    });
    m.def("autocorrelation", &autocorrelation, py::arg("series"), py::arg("max_lag"));

    py::class_<ARModel>(m, "ARModel")
        .def_readonly("order", &ARModel::order)
        .def_readonly("alpha", &ARModel::alpha)
        .def_readonly("sigma2", &ARModel::sigma2)
        .def_property_readonly("sigma", &ARModel::sigma)
        .def("to_json", [](const ARModel& a) { return to_json(a).dump(); });

    m.def("fit_ar", [](const DatedSeries& s, int max_order) {
        const auto sel = fit_ar(as_anomalies(s), max_order);
        py::list aic;
        for (const auto& c : sel.candidates)
            aic.append(py::make_tuple(c.order, c.aic));
        return py::make_tuple(sel.chosen(), aic);
    }, py::arg("anomalies"), py::arg("max_order") = 6,
          "Returns (chosen model, [(order, aic), ...]).");
    m.def("fit_ar1", [](const DatedSeries& s) { return fit_ar_order(as_anomalies(s), 1); });
    m.def("exceedance_prob", [](double alpha, double sigma, double t_now, double tau) {
        return exceedance_prob(ARModel{1, {alpha}, sigma * sigma, {}}, t_now, tau);
    }, py::arg("alpha"), py::arg("sigma"), py::arg("t_now"), py::arg("tau"));
    m.def("simulate_ar1", [](double alpha, double sigma, std::size_t n, std::uint64_t seed, const std::string& start,
                             std::size_t burn_in) -> DatedSeries {
        return simulate_ar1(alpha, sigma, n, seed, {parse_date(start), burn_in});
    }, py::arg("alpha"), py::arg("sigma"), py::arg("n"), py::arg("seed"), py::arg("start") = "1970-01-01",
          py::arg("burn_in") = 0);

    m.def("empirical_cebr", [](const DatedSeries& s, double tau) {
        const auto c = empirical_cebr(as_anomalies(s), tau);
        return py::make_tuple(c.rate, c.trials_used);
    }, py::arg("anomalies"), py::arg("tau"), "Returns (rate, trials_used).");

    m.def("threshold_from_quantile", [](double alpha, double sigma, double q) {
        return threshold_from_quantile({alpha, sigma, q});
    }, py::arg("alpha"), py::arg("sigma"), py::arg("q"));
    m.def("theoretical_cebr", [](double alpha, double sigma, double q) {
        return estimate(theoretical_cebr({alpha, sigma, q}));
    }, py::arg("alpha"), py::arg("sigma") = 1.0, py::arg("q"));
    m.def("cebr_expected_brier", &cebr_expected_brier, py::arg("rate"));
    m.def("ar1_expected_brier", [](double alpha, double sigma, double q) {
        return estimate(ar1_expected_brier({alpha, sigma, q}));
    }, py::arg("alpha"), py::arg("sigma") = 1.0, py::arg("q"));
    m.def("theoretical_bss", [](double alpha, double sigma, double q) {
        return estimate(theoretical_bss({alpha, sigma, q}));
    }, py::arg("alpha"), py::arg("sigma") = 1.0, py::arg("q"));

    m.def("brier", &brier, py::arg("p"), py::arg("x"));
    m.def("bss", &bss, py::arg("mean_s1"), py::arg("mean_s2"));
    m.def("roc_curve", [](const std::vector<double>& p, const std::vector<int>& x) {
        py::list out;
        for (const auto& pt : roc_curve(trial_set(p, x)).points)
            out.append(py::make_tuple(pt.zeta, pt.false_alarm_rate, pt.hit_rate));
        return out;
    }, py::arg("p"), py::arg("x"), "Returns [(zeta, F, H), ...].");
    m.def("auc", [](const std::vector<double>& p, const std::vector<int>& x) {
        return auc(roc_curve(trial_set(p, x)));
    }, py::arg("p"), py::arg("x"));
    m.def("auc_delong_ci", [](const std::vector<double>& p, const std::vector<int>& x, double level) {
        const auto e = auc_delong_ci(trial_set(p, x), level);
        return py::make_tuple(e.auc, e.variance, py::make_tuple(e.ci.lo, e.ci.hi));
    }, py::arg("p"), py::arg("x"), py::arg("level") = 0.95, "Returns (auc, variance, (lo, hi)).");

    m.def("dressed_exceedance_prob", [](const std::vector<double>& members, double width, double tau) {
        return dressed_exceedance_prob(members, width, tau);
    }, py::arg("members"), py::arg("kernel_width"), py::arg("tau"));
    m.def("wang_kernel_width", [](double d2bar, double s2bar, std::size_t members) {
        const auto s = wang_kernel_width(d2bar, s2bar, members);
        return py::make_tuple(s.sigma_k2, s.floored);
    }, py::arg("d2bar"), py::arg("s2bar"), py::arg("members"), "Returns (sigma_k^2, floored).");

    m.def("run_cli", [](std::vector<std::string> args) {
        args.insert(args.begin(), "tailcast");
        std::vector<const char*> argv;
        for (const auto& a : args)
            argv.push_back(a.c_str());
        return run_cli(static_cast<int>(argv.size()), argv.data());
    }, py::arg("args"), "Runs a CLI command line and returns the exit code.");
}
