#include "tailcast/io.hpp"

#include <cmath>
#include <limits>
#include <ostream>

#include "csv_util.hpp"
#include "tailcast/error.hpp"

namespace tailcast {

namespace {

template <class T>
T get_field(const Json& j, const char* key)
{
    if (!j.contains(key))
        throw Error(ErrorCode::parse, std::string("JSON field '") + key + "' missing");
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::parse, std::string("JSON field '") + key + "': " + e.what());
    }
}

double cell_number(const std::string& s)
{
    if (s.empty())
        return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf")
        return std::numeric_limits<double>::infinity();
    if (s == "-inf")
        return -std::numeric_limits<double>::infinity();
    const auto v = detail::parse_number(s);
    if (!v)
        throw Error(ErrorCode::parse, "invalid number '" + s + "'");
    return *v;
}

std::string cell(double v)
{
    return std::isfinite(v) ? format_number(v) : std::string{};
}

// JSON has no NaN; uncomputable values become null.
Json json_number(double v)
{
    return std::isfinite(v) ? Json(v) : Json(nullptr);
}

}  // namespace

std::string format_number(double v)
{
    return detail::format_number(v);
}

// --- JSON --------------------------------------------------------------------

Json to_json(const ClimatologyModel& model)
{
    Json j;
    j["epoch"] = format_date(model.epoch);
    j["omega"] = model.omega;
    j["beta"] = model.beta;
    j["std_errors"] = model.std_errors;
    j["n_used"] = model.n_used;
    j["residual_sd"] = model.residual_sd;
    j["warnings"] = model.warnings;
    return j;
}

ClimatologyModel climatology_from_json(const Json& j)
{
    ClimatologyModel m;
    m.epoch = parse_date(get_field<std::string>(j, "epoch"));
    m.omega = get_field<double>(j, "omega");
    m.beta = get_field<std::vector<double>>(j, "beta");
    if (m.beta.empty() || m.beta.size() % 2 != 1)
        throw Error(ErrorCode::parse, "climatology beta must have 2h+1 entries");
    if (j.contains("std_errors"))
        m.std_errors = j["std_errors"].get<std::vector<double>>();
    if (j.contains("n_used"))
        m.n_used = j["n_used"].get<std::size_t>();
    if (j.contains("residual_sd"))
        m.residual_sd = j["residual_sd"].get<double>();
    return m;
}

Json to_json(const ARModel& model)
{
    Json j;
    j["order"] = model.order;
    j["alpha"] = model.alpha;
    j["sigma2"] = model.sigma2;
    j["source_window"] = model.source_window;
    return j;
}

ARModel ar_model_from_json(const Json& j)
{
    ARModel m;
    m.order = get_field<int>(j, "order");
    m.alpha = get_field<std::vector<double>>(j, "alpha");
    m.sigma2 = get_field<double>(j, "sigma2");
    if (j.contains("source_window"))
        m.source_window = j["source_window"].get<std::string>();
    if (m.order < 1 || m.alpha.size() != static_cast<std::size_t>(m.order) || !(m.sigma2 > 0.0))
        throw Error(ErrorCode::parse, "inconsistent AR model JSON");
    return m;
}

Json to_json(const OrderSelection& selection)
{
    Json j;
    j["chosen_order"] = selection.chosen_order;
    j["n_pairs"] = selection.n_pairs;
    Json c = Json::array();
    for (const auto& cand : selection.candidates)
        c.push_back({{"order", cand.order}, {"aic", cand.aic}, {"model", to_json(cand.model)}});
    j["candidates"] = std::move(c);
    return j;
}

Json to_json(const CEBRModel& model)
{
    return {{"tau", model.tau}, {"rate", model.rate}, {"trials_used", model.trials_used}};
}

Json to_json(const YearCalibration& cal)
{
    Json j;
    j["year"] = cal.year;
    j["skipped"] = cal.skipped;
    if (cal.skipped) {
        j["reason"] = cal.reason;
        return j;
    }
    j["window"] = cal.bias->window.to_string();
    j["bias_beta"] = cal.bias->harmonic.beta;
    j["d2bar"] = cal.inflation.d2bar;
    j["s2bar"] = cal.inflation.s2bar;
    j["members"] = cal.inflation.members;
    j["sigma_k2"] = cal.inflation.sigma_k2;
    j["floored"] = cal.inflation.floored;
    j["days"] = cal.inflation.days;
    return j;
}

Json to_json(const SkillReport& report)
{
    Json rows = Json::array();
    for (const auto& r : report.rows) {
        Json row;
        row["scheme"] = to_string(r.scheme);
        row["q"] = r.q;
        row["tau"] = r.tau;
        row["n_trials"] = r.n_trials;
        row["n_events"] = r.n_events;
        row["brier"] = json_number(r.brier);
        row["bss"] = json_number(r.bss);
        row["bss_lo"] = json_number(r.bss_lo);
        row["bss_hi"] = json_number(r.bss_hi);
        row["auc"] = json_number(r.auc);
        row["auc_lo"] = json_number(r.auc_lo);
        row["auc_hi"] = json_number(r.auc_hi);
        row["flags"] = r.flags;
        rows.push_back(std::move(row));
    }
    return {{"rows", std::move(rows)}, {"notes", report.notes}};
}

// --- CSV -------------------------------------------------------------------

std::size_t CsvTable::column(const std::string& name) const
{
    if (const auto c = detail::find_column(header, name))
        return *c;
    throw Error(ErrorCode::parse, "CSV lacks column '" + name + "'");
}

CsvTable read_csv(std::istream& in)
{
    CsvTable t;
    std::string line;
    std::size_t lineno = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::trim(line).empty())
            continue;
        auto fields = detail::split(line, ',');
        if (!have_header) {
            t.header = std::move(fields);
            have_header = true;
            continue;
        }
        if (fields.size() != t.header.size())
            throw ParseError(lineno, "expected " + std::to_string(t.header.size()) + " fields, found " +
                                         std::to_string(fields.size()));
        t.rows.push_back(std::move(fields));
    }
    if (!have_header)
        throw Error(ErrorCode::parse, "CSV has no header");
    return t;
}

void write_skill_report_csv(std::ostream& out, const SkillReport& report)
{
    for (std::size_t i = 0; i < kSkillReportColumns.size(); ++i)
        out << (i ? "," : "") << kSkillReportColumns[i];
    out << '\n';
    for (const auto& r : report.rows) {
        std::string flags;
        for (const auto& f : r.flags)
            flags += (flags.empty() ? "" : "|") + f;
        out << to_string(r.scheme) << ',' << cell(r.q) << ',' << cell(r.tau) << ',' << r.n_trials << ','
            << r.n_events << ',' << cell(r.brier) << ',' << cell(r.bss) << ',' << cell(r.bss_lo) << ','
            << cell(r.bss_hi) << ',' << cell(r.auc) << ',' << cell(r.auc_lo) << ',' << cell(r.auc_hi) << ','
            << flags << '\n';
    }
}

SkillReport read_skill_report_csv(std::istream& in)
{
    const auto t = read_csv(in);
    if (t.header != kSkillReportColumns)
        throw Error(ErrorCode::parse, "unexpected skill report header");
    SkillReport report;
    for (const auto& f : t.rows) {
        SkillRow r;
        const auto scheme = scheme_from_string(f[0]);
        if (!scheme)
            throw Error(ErrorCode::parse, "unknown scheme '" + f[0] + "'");
        r.scheme = *scheme;
        r.q = cell_number(f[1]);
        r.tau = cell_number(f[2]);
        r.n_trials = static_cast<std::size_t>(cell_number(f[3]));
        r.n_events = static_cast<std::size_t>(cell_number(f[4]));
        r.brier = cell_number(f[5]);
        r.bss = cell_number(f[6]);
        r.bss_lo = cell_number(f[7]);
        r.bss_hi = cell_number(f[8]);
        r.auc = cell_number(f[9]);
        r.auc_lo = cell_number(f[10]);
        r.auc_hi = cell_number(f[11]);
        for (std::size_t start = 0; start < f[12].size();) {
            const auto bar = f[12].find('|', start);
            r.flags.push_back(f[12].substr(start, bar - start));
            if (bar == std::string::npos)
                break;
            start = bar + 1;
        }
        report.rows.push_back(std::move(r));
    }
    return report;
}

void write_roc_csv(std::ostream& out, const RocCurve& curve)
{
    out << "zeta,F,H\n";
    for (const auto& p : curve.points) {
        const std::string zeta = std::isinf(p.zeta) ? (p.zeta > 0 ? "inf" : "-inf") : format_number(p.zeta);
        out << zeta << ',' << format_number(p.false_alarm_rate) << ',' << format_number(p.hit_rate) << '\n';
    }
}

RocCurve read_roc_csv(std::istream& in)
{
    const auto t = read_csv(in);
    const auto cz = t.column("zeta");
    const auto cf = t.column("F");
    const auto ch = t.column("H");
    RocCurve curve;
    for (const auto& f : t.rows) {
        RocPoint p;
        p.zeta = cell_number(f[cz]);
        p.false_alarm_rate = cell_number(f[cf]);
        p.hit_rate = cell_number(f[ch]);
        curve.points.push_back(p);
    }
    return curve;
}

void write_theory_header(std::ostream& out)
{
    out << "alpha,q,tau,r_tau,brier_cebr,brier_ar1,bss,r_tau_err,brier_ar1_err,bss_err,flags\n";
}

void write_theory_row(std::ostream& out, const TheoryRow& row)
{
    out << format_number(row.params.alpha) << ',' << format_number(row.params.q) << ',' << format_number(row.tau)
        << ',' << format_number(row.r_tau.value) << ',' << format_number(row.brier_cebr.value) << ','
        << format_number(row.brier_ar1.value) << ',' << format_number(row.bss.value) << ','
        << format_number(row.r_tau.abs_error) << ',' << format_number(row.brier_ar1.abs_error) << ','
        << format_number(row.bss.abs_error) << ",\n";
}

void write_theory_failure(std::ostream& out, double alpha, double q, const std::string& flag)
{
    out << format_number(alpha) << ',' << format_number(q) << ",,,,,,,,," << flag << '\n';
}

void write_density_csv(std::ostream& out, const DensityEstimate& density)
{
    out << "x,density\n";
    for (std::size_t i = 0; i < density.grid.size(); ++i)
        out << format_number(density.grid[i]) << ',' << format_number(density.density[i]) << '\n';
}

void write_acf_csv(std::ostream& out, const std::vector<double>& acf)
{
    out << "lag,acf\n";
    for (std::size_t k = 0; k < acf.size(); ++k)
        out << k << ',' << format_number(acf[k]) << '\n';
}

}  // namespace tailcast
