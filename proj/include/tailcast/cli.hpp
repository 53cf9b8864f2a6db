#pragma once

// Batch commands behind the `tailcast` executable. Each command reads a
// RunConfig and writes its outputs under config.out.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tailcast/ensemble.hpp"
#include "tailcast/io.hpp"
#include "tailcast/series.hpp"
#include "tailcast/verify.hpp"

namespace tailcast {

struct SimulateConfig {
    double alpha = 0.72;
    double sigma = 3.06;
    std::string start = "1946-01-01";
    std::size_t days = 23741;  // 1946-01-01 .. 2010-12-31
    std::size_t burn_in = 0;
    /// Climatology added to the simulated anomalies; empty writes anomalies.
    std::vector<double> climatology;
    bool ensemble = false;
    SyntheticEnsembleOptions ensemble_options;
};

struct RunConfig {
    std::string observations;
    std::string ensemble;       // optional archive path
    std::optional<Site> site;   // grid point selection for gridded archives
    CsvFormat csv;

    int harmonics = 2;
    std::optional<YearRange> climatology_window;  // defaults to `train`
    YearRange train{1946, 1978};
    YearRange test{1979, 2010};

    std::vector<double> q_grid = default_q_grid();
    std::vector<std::string> schemes = {"cebr", "ar1", "raw", "post"};
    int max_order = 6;
    std::size_t acf_lags = 30;

    std::vector<double> alphas = {0.0, 0.4, 0.72, 0.9};
    std::vector<double> theory_q_grid;  // defaults to 0.01, 0.02, ..., 0.99

    BootstrapOptions bootstrap;
    double auc_level = 0.95;
    std::size_t min_events = 10;
    CalibrationOptions calibration;

    SimulateConfig simulate;

    std::uint64_t seed = 0;
    std::string out = "out";

    /// Throws ErrorCode::domain on inconsistent settings.
    void validate() const;
};

/// Unknown keys are rejected so that typos do not silently fall back to
/// defaults.
RunConfig config_from_json(const Json& j);
RunConfig load_config(const std::string& path);
Json to_json(const RunConfig& config);

std::vector<double> default_theory_q_grid();

/// Every command returns the list of files it wrote, relative to config.out.
using Written = std::vector<std::string>;

Written cmd_climatology(const RunConfig& config);
Written cmd_fit_ar(const RunConfig& config);
Written cmd_theory(const RunConfig& config);
Written cmd_forecast(const RunConfig& config);
Written cmd_calibrate(const RunConfig& config);
Written cmd_evaluate(const RunConfig& config);
Written cmd_simulate(const RunConfig& config);

/// Full command line: parses arguments, runs the subcommand and maps errors
/// to exit codes (0 ok, 2 input error, 3 numeric failure).
int run_cli(int argc, const char* const* argv);

}  // namespace tailcast
