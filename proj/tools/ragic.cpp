// ragic <train|forecast|evaluate|plot|ablate|dump-defaults> --config <path> [--out <dir>] [--seed <u64>]

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ragic/config.hpp"
#include "ragic/error.hpp"
#include "ragic/pipeline.hpp"

namespace {

int run(const std::string& command, const std::string& config_path, const std::optional<std::string>& out,
        const std::optional<std::uint64_t>& seed) {
    using namespace ragic;
    if (command == "dump-defaults") {
        RunConfig cfg;
        if (!config_path.empty()) cfg = parse_config(config_path);
        if (out) cfg.out_dir = *out;
        if (seed) cfg.seed = *seed;
        std::cout << config_to_json(cfg).dump(2) << '\n';
        return 0;
    }
    if (config_path.empty()) fail(ErrorKind::config, "--config is required for '" + command + "'");
    RunConfig cfg = parse_config(config_path);
    if (out) cfg.out_dir = *out;
    if (seed) cfg.seed = *seed;
    const bool needs_data = command != "plot";
    cfg.validate(needs_data && command != "evaluate");
    if (command == "train") return command_train(cfg);
    if (command == "forecast") return command_forecast(cfg);
    if (command == "evaluate") return command_evaluate(cfg);
    if (command == "plot") return command_plot(cfg);
    if (command == "ablate") return command_ablate(cfg);
    fail(ErrorKind::config, "unknown command '" + command + "'");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Risk-aware adversarial interval forecaster"};
    std::string command;
    std::string config_path;
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;
    app.add_option("command", command, "train | forecast | evaluate | plot | ablate | dump-defaults")
        ->required()
        ->check(CLI::IsMember({"train", "forecast", "evaluate", "plot", "ablate", "dump-defaults"}));
    app.add_option("--config", config_path, "flat JSON run configuration");
    app.add_option("--out", out, "output directory (overrides out_dir)");
    app.add_option("--seed", seed, "root random seed (overrides seed)");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    try {
        return run(command, config_path, out, seed);
    } catch (const ragic::Error& e) {
        std::cerr << "ragic: error[" << ragic::to_string(e.kind()) << "]: " << e.what() << '\n';
        return ragic::exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "ragic: error[internal]: " << e.what() << '\n';
        return 1;
    }
}
