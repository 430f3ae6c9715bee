#pragma once

#include <nlohmann/json.hpp>

#include "lab/config.hpp"

namespace lab {

// Runs one named scenario: writes report.json, samples_<label>.csv and
// scatter_<label>.svg under cfg.out_dir. Re-running with identical
// (scenario, config, seed) reproduces every file byte for byte except the
// report's generated_at value. Returns 0 on success; configuration and I/O
// problems surface as exceptions for the CLI to map to exit codes.
int run_scenario(const ScenarioConfig& cfg);

// The report document for one run (same content that run_scenario writes).
nlohmann::ordered_json build_report(const ScenarioConfig& cfg);

// Parallelism cap for the toy-gan grid; reads LAB_THREADS (>= 1).
int thread_cap();

}  // namespace lab
