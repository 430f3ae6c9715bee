#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lab/attack.hpp"
#include "lab/distributions.hpp"
#include "lab/gan.hpp"

namespace lab {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Input distribution for analytic-scenario input draws: the disk/annulus
// observed-coordinate marginal (default) or uniform over the domain.
enum class InputLaw { Marginal, Uniform };

struct EvalOptions {
    int n_samples = 1000;
    int k = 5;
    int std_seeds = 32;
    bool use_training_reals = false;
    InputLaw input_law = InputLaw::Marginal;
    bool compute_w2 = true;
};

// Upper-bound check settings: a boundary-reaching attack makes the check
// meaningful (the default training attack barely leaves the origin).
struct BoundOptions {
    int n_inputs = 100;
    int m = 256;
    AttackConfig attack;

    BoundOptions() {
        attack.epsilon = 1e-3;
        attack.steps = 50;
        attack.step_size = attack.epsilon / 4.0;
        attack.n_seeds = 50;
    }
};

// A fully resolved scenario invocation: named preset defaults with JSON
// overrides applied. Unknown keys and type mismatches are rejected.
struct ScenarioConfig {
    std::string scenario;
    std::filesystem::path out_dir;
    std::uint64_t master_seed = 0;

    std::string preset = "reduced";  // "reduced" | "full"
    TrainConfig train = TrainConfig::reduced_preset(false, 0.0);
    double lambda_robust = 0.1;  // robust models in the toy-gan grid
    EvalOptions eval;

    std::vector<int> zigzag_frequencies{1, 2, 4, 8, 16};
    int zigzag_n = 2000;

    EllipseAnnulus ellipse = EllipseAnnulus::default_preset();
    int ellipse_n = 1000;

    BoundOptions bound;

    nlohmann::ordered_json to_json() const;  // resolved echo for report.json
};

const std::vector<std::string>& scenario_names();

// Parses a JSON override document; throws ConfigError with position
// diagnostics on malformed input.
nlohmann::json load_config_json(const std::filesystem::path& path);

// Builds the resolved config from (scenario, out dir, seed, overrides).
// Empty overrides mean preset defaults.
ScenarioConfig make_scenario_config(const std::string& scenario,
                                    const std::filesystem::path& out_dir,
                                    std::uint64_t master_seed,
                                    const nlohmann::json& overrides);

}  // namespace lab
