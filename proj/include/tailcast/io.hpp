#pragma once

// JSON and CSV encodings of models and reports.

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "tailcast/ar.hpp"
#include "tailcast/cebr.hpp"
#include "tailcast/ensemble.hpp"
#include "tailcast/series.hpp"
#include "tailcast/theory.hpp"
#include "tailcast/verify.hpp"

namespace tailcast {

using Json = nlohmann::ordered_json;

Json to_json(const ClimatologyModel& model);
ClimatologyModel climatology_from_json(const Json& j);

/// {order, alpha[], sigma2, source_window}
Json to_json(const ARModel& model);
ARModel ar_model_from_json(const Json& j);

Json to_json(const OrderSelection& selection);
Json to_json(const CEBRModel& model);  // {tau, rate, trials_used}
Json to_json(const YearCalibration& calibration);
Json to_json(const SkillReport& report);

// --- CSV -------------------------------------------------------------------

/// Header plus string cells; the generic reader behind the typed ones.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(const std::string& name) const;  // throws ErrorCode::parse
};

CsvTable read_csv(std::istream& in);

inline const std::vector<std::string> kSkillReportColumns = {
    "scheme", "q",      "tau",    "n_trials", "n_events", "brier", "bss",
    "bss_lo", "bss_hi", "auc",    "auc_lo",   "auc_hi",   "flags"};

/// Non-finite numbers are written as empty cells; flags are '|'-joined.
void write_skill_report_csv(std::ostream& out, const SkillReport& report);
SkillReport read_skill_report_csv(std::istream& in);

/// zeta,F,H with zeta written as inf / -inf at the ends.
void write_roc_csv(std::ostream& out, const RocCurve& curve);
RocCurve read_roc_csv(std::istream& in);

/// alpha,q,tau,r_tau,brier_cebr,brier_ar1,bss followed by the quadrature
/// error columns and a flags column.
void write_theory_header(std::ostream& out);
void write_theory_row(std::ostream& out, const TheoryRow& row);
void write_theory_failure(std::ostream& out, double alpha, double q, const std::string& flag);

void write_density_csv(std::ostream& out, const DensityEstimate& density);
void write_acf_csv(std::ostream& out, const std::vector<double>& acf);

/// The number formatting used by every writer (shortest round-trip form).
std::string format_number(double v);

}  // namespace tailcast
