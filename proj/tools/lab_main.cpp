#include <CLI11.hpp>
#include <cstdint>
#include <iostream>
#include <string>

#include "lab/config.hpp"
#include "lab/scenarios.hpp"

int main(int argc, char** argv) {
    CLI::App app{"deterministic-vs-stochastic restoration laboratory"};

    std::string scenario;
    std::string config_path;
    std::string out_dir = "out";
    std::uint64_t seed = 0;
    bool list = false;

    app.add_option("scenario", scenario, "one of: analytic-demo, ellipse-demo, zigzag-sweep, "
                                         "bound-check, posterior-check, toy-gan");
    app.add_option("--config", config_path, "JSON override file");
    app.add_option("--out", out_dir, "output directory (created if missing)");
    app.add_option("--seed", seed, "master seed (u64)");
    app.add_flag("--list", list, "list scenarios and exit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    if (list) {
        for (const std::string& name : lab::scenario_names()) std::cout << name << '\n';
        return 0;
    }
    if (scenario.empty()) {
        std::cerr << "usage: lab <scenario> [--config <path>] [--out <dir>] [--seed <u64>]\n";
        return 2;
    }

    try {
        nlohmann::json overrides;  // null: preset defaults
        if (!config_path.empty()) overrides = lab::load_config_json(config_path);
        const lab::ScenarioConfig cfg =
            lab::make_scenario_config(scenario, out_dir, seed, overrides);
        const int rc = lab::run_scenario(cfg);
        if (rc == 0)
            std::cout << "wrote " << (cfg.out_dir / "report.json").string() << '\n';
        return rc;
    } catch (const lab::UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const lab::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
