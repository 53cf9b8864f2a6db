#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "tailcast/cli.hpp"
#include "tailcast/error.hpp"
#include "tailcast/theory.hpp"

namespace tailcast {

namespace fs = std::filesystem;

namespace {

// Walks one JSON object, remembering which keys were consumed.
class Fields {
public:
    Fields(const Json& j, std::string context) : j_(j), context_(std::move(context))
    {
        if (!j_.is_object())
            throw Error(ErrorCode::parse, "config " + where() + " must be an object");
    }

    template <class T>
    void get(const char* key, T& dst)
    {
        if (!j_.contains(key))
            return;
        seen_.insert(key);
        try {
            dst = j_.at(key).get<T>();
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::parse, "config " + where() + key + ": " + e.what());
        }
    }

    void get_years(const char* key, YearRange& dst)
    {
        std::optional<YearRange> tmp;
        get_years(key, tmp);
        if (tmp)
            dst = *tmp;
    }

    void get_years(const char* key, std::optional<YearRange>& dst)
    {
        std::vector<int> v;
        get(key, v);
        if (!j_.contains(key))
            return;
        if (v.size() != 2)
            throw Error(ErrorCode::parse, "config " + where() + key + " must be [first_year, last_year]");
        dst = YearRange{v[0], v[1]};
    }

    const Json* object(const char* key)
    {
        if (!j_.contains(key))
            return nullptr;
        seen_.insert(key);
        return &j_.at(key);
    }

    std::string child(const char* key) const { return context_ + key + "."; }

    void finish() const
    {
        for (const auto& item : j_.items())
            if (!seen_.count(item.key()))
                throw Error(ErrorCode::parse, "unknown config key '" + where() + item.key() + "'");
    }

private:
    std::string where() const { return context_; }

    const Json& j_;
    std::string context_;
    std::set<std::string> seen_;
};

Json years_json(const YearRange& r)
{
    return Json::array({r.first, r.last});
}

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

class Output {
public:
    explicit Output(const RunConfig& config) : root_(config.out)
    {
        std::error_code ec;
        fs::create_directories(root_, ec);
        if (ec)
            throw Error(ErrorCode::io, "cannot create output directory '" + root_.string() + "': " + ec.message());
    }

    void write(const std::string& name, const std::function<void(std::ostream&)>& body)
    {
        const fs::path path = root_ / name;
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
        std::ofstream out(path, std::ios::binary);
        if (!out)
            throw Error(ErrorCode::io, "cannot write '" + path.string() + "'");
        body(out);
        out.flush();
        if (!out)
            throw Error(ErrorCode::io, "write failed for '" + path.string() + "'");
        written_.push_back(name);
    }

    void write_json(const std::string& name, const Json& j)
    {
        write(name, [&](std::ostream& out) { out << j.dump(2) << '\n'; });
    }

    Written take() { return std::move(written_); }

private:
    fs::path root_;
    Written written_;
};

struct Prepared {
    DailySeries observations;
    ClimatologyModel climatology;
    AnomalySeries anomalies;
    std::optional<EnsembleSeries> ensemble;  // anomaly space
};

Prepared prepare(const RunConfig& config, bool with_ensemble)
{
    if (config.observations.empty())
        throw Error(ErrorCode::io, "no observations file configured");
    Prepared p;
    p.observations = load_daily_series_file(config.observations, config.csv);
    const YearRange window = config.climatology_window.value_or(config.train);
    p.climatology = fit_climatology(p.observations, config.harmonics, window);
    p.anomalies = compute_anomalies(p.observations, p.climatology);
    if (with_ensemble && !config.ensemble.empty())
        p.ensemble = ensemble_anomalies(load_ensemble_csv_file(config.ensemble, config.site), p.climatology);
    return p;
}

std::vector<Scheme> resolve_schemes(const RunConfig& config, bool have_ensemble)
{
    std::vector<Scheme> out;
    for (const auto& name : config.schemes) {
        const auto s = scheme_from_string(name);
        if (!s)
            throw Error(ErrorCode::domain, "unknown scheme '" + name + "'");
        if ((*s == Scheme::raw_ensemble || *s == Scheme::postprocessed_ensemble) && !have_ensemble)
            continue;
        if (std::find(out.begin(), out.end(), *s) == out.end())
            out.push_back(*s);
    }
    if (out.empty())
        throw Error(ErrorCode::domain, "no runnable schemes configured");
    return out;
}

ForecastSuite make_suite(const RunConfig& config, Prepared& p)
{
    SuiteInputs in;
    in.observations = p.anomalies;
    in.train = config.train;
    in.test = config.test;
    in.ensemble = p.ensemble;
    in.calibration = config.calibration;
    in.calibration.harmonics = config.harmonics;
    ForecastSuite suite(std::move(in));
    if (suite.testing().present_count() == 0)
        throw Error(ErrorCode::insufficient_data, "no observations in test window " + config.test.to_string());
    return suite;
}

std::string q_label(double q)
{
    std::ostringstream s;
    s.precision(2);
    s << std::fixed << q;
    return s.str();
}

std::string optional_cell(const std::optional<double>& v)
{
    return v ? format_number(*v) : std::string{};
}

}  // namespace

std::vector<double> default_theory_q_grid()
{
    std::vector<double> q;
    for (int i = 1; i <= 99; ++i)
        q.push_back(i / 100.0);
    return q;
}

void RunConfig::validate() const
{
    if (train.first > train.last || test.first > test.last)
        throw Error(ErrorCode::domain, "train and test windows must be [first, last] with first <= last");
    if (train.last >= test.first)
        throw Error(ErrorCode::domain, "training window must precede the test window");
    for (double q : q_grid)
        if (!(q > 0.0 && q < 1.0))
            throw Error(ErrorCode::domain, "q grid values must lie in (0,1)");
    for (double q : theory_q_grid)
        if (!(q > 0.0 && q < 1.0))
            throw Error(ErrorCode::domain, "theory q grid values must lie in (0,1)");
    for (double a : alphas)
        if (!(std::abs(a) < 1.0))
            throw Error(ErrorCode::domain, "theory alphas must satisfy |alpha| < 1");
    if (harmonics < 1)
        throw Error(ErrorCode::domain, "harmonics must be >= 1");
    if (max_order < 1)
        throw Error(ErrorCode::domain, "max_order must be >= 1");
    if (bootstrap.block_len < 1 || bootstrap.replicates < 1 || !(bootstrap.level > 0.0 && bootstrap.level < 1.0))
        throw Error(ErrorCode::domain, "invalid bootstrap settings");
    if (!(auc_level > 0.0 && auc_level < 1.0))
        throw Error(ErrorCode::domain, "auc_level must lie in (0,1)");
}

RunConfig config_from_json(const Json& j)
{
    RunConfig c;
    Fields f(j, "");
    f.get("observations", c.observations);
    f.get("ensemble", c.ensemble);
    if (const Json* s = f.object("site")) {
        Fields fs(*s, f.child("site"));
        Site site;
        fs.get("lat", site.lat);
        fs.get("lon", site.lon);
        fs.finish();
        c.site = site;
    }
    if (const Json* s = f.object("csv")) {
        Fields fc(*s, f.child("csv"));
        std::string delim(1, c.csv.delimiter);
        fc.get("delimiter", delim);
        if (delim.size() != 1)
            throw Error(ErrorCode::parse, "config csv.delimiter must be one character");
        c.csv.delimiter = delim[0];
        fc.get("date_column", c.csv.date_column);
        fc.get("value_column", c.csv.value_column);
        fc.finish();
    }
    f.get("harmonics", c.harmonics);
    f.get_years("climatology_window", c.climatology_window);
    f.get_years("train", c.train);
    f.get_years("test", c.test);
    f.get("q_grid", c.q_grid);
    f.get("schemes", c.schemes);
    f.get("max_order", c.max_order);
    f.get("acf_lags", c.acf_lags);
    f.get("alphas", c.alphas);
    f.get("theory_q_grid", c.theory_q_grid);
    if (const Json* s = f.object("bootstrap")) {
        Fields fb(*s, f.child("bootstrap"));
        fb.get("level", c.bootstrap.level);
        fb.get("block_len", c.bootstrap.block_len);
        fb.get("replicates", c.bootstrap.replicates);
        fb.finish();
    }
    f.get("auc_level", c.auc_level);
    f.get("min_events", c.min_events);
    if (const Json* s = f.object("calibration")) {
        Fields fc(*s, f.child("calibration"));
        fc.get("min_days_per_year", c.calibration.min_days_per_year);
        fc.finish();
    }
    if (const Json* s = f.object("simulate")) {
        Fields fs(*s, f.child("simulate"));
        auto& sim = c.simulate;
        fs.get("alpha", sim.alpha);
        fs.get("sigma", sim.sigma);
        fs.get("start", sim.start);
        fs.get("days", sim.days);
        fs.get("burn_in", sim.burn_in);
        fs.get("climatology", sim.climatology);
        if (const Json* e = fs.object("ensemble")) {
            Fields fe(*e, fs.child("ensemble"));
            auto& eo = sim.ensemble_options;
            fe.get("enabled", sim.ensemble);
            fe.get("members", eo.members);
            fe.get("lead_hours", eo.lead_hours);
            fe.get("explained_variance", eo.explained_variance);
            fe.get("bias_offset", eo.bias_offset);
            fe.get("bias_amplitude", eo.bias_amplitude);
            fe.get("bias_phase", eo.bias_phase);
            fe.get("spread_factor", eo.spread_factor);
            fe.finish();
        }
        fs.finish();
    }
    f.get("seed", c.seed);
    f.get("out", c.out);
    f.finish();
    return c;
}

RunConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorCode::io, "cannot open config '" + path + "'");
    Json j;
    try {
        j = Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::parse, "config '" + path + "': " + e.what());
    }
    return config_from_json(j);
}

Json to_json(const RunConfig& c)
{
    Json j;
    j["observations"] = c.observations;
    j["ensemble"] = c.ensemble;
    if (c.site)
        j["site"] = {{"lat", c.site->lat}, {"lon", c.site->lon}};
    j["csv"] = {{"delimiter", std::string(1, c.csv.delimiter)},
                {"date_column", c.csv.date_column},
                {"value_column", c.csv.value_column}};
    j["harmonics"] = c.harmonics;
    if (c.climatology_window)
        j["climatology_window"] = years_json(*c.climatology_window);
    j["train"] = years_json(c.train);
    j["test"] = years_json(c.test);
    j["q_grid"] = c.q_grid;
    j["schemes"] = c.schemes;
    j["max_order"] = c.max_order;
    j["acf_lags"] = c.acf_lags;
    j["alphas"] = c.alphas;
    j["theory_q_grid"] = c.theory_q_grid;
    j["bootstrap"] = {{"level", c.bootstrap.level},
                      {"block_len", c.bootstrap.block_len},
                      {"replicates", c.bootstrap.replicates}};
    j["auc_level"] = c.auc_level;
    j["min_events"] = c.min_events;
    j["calibration"] = {{"min_days_per_year", c.calibration.min_days_per_year}};
    const auto& s = c.simulate;
    const auto& e = s.ensemble_options;
    j["simulate"] = {{"alpha", s.alpha},
                     {"sigma", s.sigma},
                     {"start", s.start},
                     {"days", s.days},
                     {"burn_in", s.burn_in},
                     {"climatology", s.climatology},
                     {"ensemble",
                      {{"enabled", s.ensemble},
                       {"members", e.members},
                       {"lead_hours", e.lead_hours},
                       {"explained_variance", e.explained_variance},
                       {"bias_offset", e.bias_offset},
                       {"bias_amplitude", e.bias_amplitude},
                       {"bias_phase", e.bias_phase},
                       {"spread_factor", e.spread_factor}}}};
    j["seed"] = c.seed;
    j["out"] = c.out;
    return j;
}

// --- commands --------------------------------------------------------------

Written cmd_climatology(const RunConfig& config)
{
    config.validate();
    const Prepared p = prepare(config, false);
    Output out(config);
    Json model = to_json(p.climatology);
    model["window"] = config.climatology_window.value_or(config.train).to_string();
    out.write_json("climatology.json", model);
    out.write("climatology.csv",
              [&](std::ostream& s) { write_series_csv(s, climatology_series(p.observations, p.climatology)); });
    out.write("anomalies.csv", [&](std::ostream& s) { write_series_csv(s, p.anomalies); });

    const auto values = p.anomalies.present_values();
    if (values.size() >= 2)
        out.write("anomaly_kde.csv", [&](std::ostream& s) { write_density_csv(s, kde_density(values)); });
    const std::size_t run = longest_present_run(p.anomalies);
    if (run >= 3) {
        const std::size_t lags = std::min(config.acf_lags, run - 2);
        out.write("acf.csv", [&](std::ostream& s) { write_acf_csv(s, autocorrelation(p.anomalies, lags)); });
    }
    return out.take();
}

Written cmd_fit_ar(const RunConfig& config)
{
    config.validate();
    const Prepared p = prepare(config, false);
    const auto train = slice_years(p.anomalies, config.train);
    const auto selection = fit_ar(train, config.max_order);
    auto ar1 = fit_ar_order(train, 1);
    ar1.source_window = config.train.to_string();
    Output out(config);
    out.write_json("ar_model.json", to_json(ar1));
    out.write_json("ar_selection.json", to_json(selection));
    return out.take();
}

Written cmd_theory(const RunConfig& config)
{
    config.validate();
    const auto grid = config.theory_q_grid.empty() ? default_theory_q_grid() : config.theory_q_grid;
    Output out(config);
    out.write("theory.csv", [&](std::ostream& s) {
        write_theory_header(s);
        for (double alpha : config.alphas)
            for (double q : grid) {
                try {
                    write_theory_row(s, theory_row({alpha, config.simulate.sigma, q}));
                } catch (const Error& e) {
                    write_theory_failure(s, alpha, q, to_string(e.code()));
                }
            }
    });
    return out.take();
}

Written cmd_forecast(const RunConfig& config)
{
    config.validate();
    Prepared p = prepare(config, true);
    const ForecastSuite suite = make_suite(config, p);
    const auto schemes = resolve_schemes(config, p.ensemble.has_value());
    const auto has = [&](Scheme s) { return std::find(schemes.begin(), schemes.end(), s) != schemes.end(); };

    Output out(config);
    out.write("forecasts.csv", [&](std::ostream& s) {
        s << "date,tau,p_raw,p_post,p_cebr,p_ar1,q,t_now,observed\n";
        for (double q : config.q_grid) {
            const double tau = suite.threshold(q);
            std::optional<CEBRModel> cebr;
            try {
                cebr = suite.cebr(tau);
            } catch (const Error& e) {
                if (e.code() != ErrorCode::no_trials)
                    throw;
            }
            Forecaster f_cebr = cebr && has(Scheme::cebr) ? cebr_forecaster(*cebr) : Forecaster{};
            Forecaster f_ar1 = has(Scheme::ar1) ? ar1_forecaster(suite.ar_model(), tau) : Forecaster{};
            Forecaster f_raw = has(Scheme::raw_ensemble) ? table_forecaster(suite.raw_probabilities(tau)) : Forecaster{};
            Forecaster f_post = has(Scheme::postprocessed_ensemble)
                                    ? table_forecaster(suite.postprocessed_probabilities(tau))
                                    : Forecaster{};
            const auto& test = suite.testing();
            for (const auto& d : test.days) {
                if (!d.present || d.value > tau)
                    continue;
                const Date today = test.date_of(d.day);
                const Date target = today + std::chrono::days{1};
                const auto call = [&](const Forecaster& fc) {
                    return fc ? fc(today, d.value) : std::optional<double>{};
                };
                s << format_date(target) << ',' << format_number(tau) << ',' << optional_cell(call(f_raw)) << ','
                  << optional_cell(call(f_post)) << ',' << optional_cell(call(f_cebr)) << ','
                  << optional_cell(call(f_ar1)) << ',' << format_number(q) << ',' << format_number(d.value) << ','
                  << optional_cell(p.anomalies.value_at(target)) << '\n';
            }
        }
    });
    return out.take();
}

Written cmd_calibrate(const RunConfig& config)
{
    config.validate();
    if (config.ensemble.empty())
        throw Error(ErrorCode::io, "calibrate needs an ensemble archive");
    Prepared p = prepare(config, true);
    const ForecastSuite suite = make_suite(config, p);
    Json years = Json::array();
    for (const auto& cal : suite.calibrations())
        years.push_back(to_json(cal));
    Output out(config);
    out.write_json("calibration.json", {{"years", std::move(years)}});
    return out.take();
}

Written cmd_evaluate(const RunConfig& config)
{
    config.validate();
    Prepared p = prepare(config, true);
    const ForecastSuite suite = make_suite(config, p);
    const auto schemes = resolve_schemes(config, p.ensemble.has_value());

    SweepOptions options;
    options.q_grid = config.q_grid;
    options.bootstrap = config.bootstrap;
    options.bootstrap.seed = config.seed;
    options.auc_level = config.auc_level;
    options.min_events = config.min_events;
    const SkillReport report = threshold_sweep(suite, schemes, options);

    Output out(config);
    out.write("skill.csv", [&](std::ostream& s) { write_skill_report_csv(s, report); });
    Json summary = to_json(report);
    summary["ar_model"] = to_json(suite.ar_model());
    summary["climatology"] = to_json(p.climatology);
    out.write_json("skill.json", summary);

    for (double q : config.q_grid) {
        const double tau = suite.threshold(q);
        for (Scheme scheme : schemes) {
            TrialSet trials;
            try {
                trials = suite.trials(scheme, tau);
            } catch (const Error& e) {
                if (e.code() == ErrorCode::no_trials)
                    continue;
                throw;
            }
            if (trials.events() == 0 || trials.events() == trials.size())
                continue;
            const RocCurve curve = roc_curve(trials);
            out.write(std::string("roc/") + to_string(scheme) + "_q" + q_label(q) + ".csv",
                      [&](std::ostream& s) { write_roc_csv(s, curve); });
        }
    }
    return out.take();
}

Written cmd_simulate(const RunConfig& config)
{
    const auto& sim = config.simulate;
    SimulationOptions opts;
    opts.epoch = parse_date(sim.start);
    opts.burn_in = sim.burn_in;
    const AnomalySeries truth = simulate_ar1(sim.alpha, sim.sigma, sim.days, config.seed, opts);

    std::optional<ClimatologyModel> clim;
    if (!sim.climatology.empty()) {
        if (sim.climatology.size() % 2 != 1)
            throw Error(ErrorCode::domain, "simulate.climatology must have 2h+1 coefficients");
        clim = ClimatologyModel{};
        clim->epoch = opts.epoch;
        clim->beta = sim.climatology;
    }

    Output out(config);
    out.write("observations.csv", [&](std::ostream& s) {
        s << "date,t2m_celsius\n";
        for (const auto& d : truth.days) {
            const Date date = truth.date_of(d.day);
            const double v = clim ? d.value + clim->at(date) : d.value;
            s << format_date(date) << ',' << format_number(v) << '\n';
        }
    });
    if (sim.ensemble) {
        EnsembleSeries ens =
            synthesize_ensemble(truth, sim.alpha, sim.sigma, sim.ensemble_options, splitmix64(config.seed ^ 0xe75eULL));
        if (clim)
            for (auto& day : ens.days) {
                const double c = clim->at(ens.date_of(day.day));
                for (auto& m : day.members)
                    m += c;
            }
        out.write("ensemble.csv", [&](std::ostream& s) { write_ensemble_csv(s, ens); });
    }
    return out.take();
}

}  // namespace tailcast
