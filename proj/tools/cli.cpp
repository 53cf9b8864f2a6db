#include <functional>
#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "tailcast/cli.hpp"
#include "tailcast/error.hpp"

namespace tailcast {

int run_cli(int argc, const char* const* argv)
{
    CLI::App app{"Threshold-exceedance forecasts for daily temperature anomalies", "tailcast"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<std::string> observations;
    std::optional<std::string> ensemble;
    app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
    app.add_option("--seed", seed, "random seed (overrides the config)");
    app.add_option("--out", out_dir, "output directory (overrides the config)");
    app.add_option("--observations", observations, "observation CSV (overrides the config)");
    app.add_option("--ensemble", ensemble, "ensemble archive CSV (overrides the config)");

    using Command = std::function<Written(const RunConfig&)>;
    const std::map<std::string, std::pair<Command, std::string>> commands = {
        {"climatology", {cmd_climatology, "fit the harmonic climatology and write anomalies"}},
        {"fit-ar", {cmd_fit_ar, "fit AR models on the training anomalies"}},
        {"theory", {cmd_theory, "theoretical CEBR / AR(1) Brier and skill curves"}},
        {"forecast", {cmd_forecast, "per-day exceedance probabilities on the test window"}},
        {"calibrate", {cmd_calibrate, "per-year ensemble bias and kernel-width calibration"}},
        {"evaluate", {cmd_evaluate, "skill report and ROC curves over the q grid"}},
        {"simulate", {cmd_simulate, "synthetic AR(1) observations and ensemble archive"}},
    };
    for (const auto& [name, cmd] : commands)
        app.add_subcommand(name, cmd.second)->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        RunConfig config = config_path.empty() ? RunConfig{} : load_config(config_path);
        if (seed)
            config.seed = *seed;
        if (out_dir)
            config.out = *out_dir;
        if (observations)
            config.observations = *observations;
        if (ensemble)
            config.ensemble = *ensemble;

        const auto* sub = app.get_subcommands().front();
        for (const auto& file : commands.at(sub->get_name()).first(config))
            std::cout << config.out << '/' << file << '\n';
        return 0;
    } catch (const Error& e) {
        std::cerr << "tailcast: " << to_string(e.code()) << ": " << e.what() << '\n';
        return is_input_error(e.code()) ? 2 : 3;
    } catch (const std::exception& e) {
        std::cerr << "tailcast: " << e.what() << '\n';
        return 3;
    }
}

}  // namespace tailcast
