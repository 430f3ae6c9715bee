#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "lab/estimators.hpp"
#include "lab/types.hpp"

namespace lab {

// One estimator's quality/robustness summary. Serializes to a flat JSON
// object; absent (or non-finite) optional metrics are omitted.
struct MetricsReport {
    std::optional<double> precision;             // in [0, 1]
    std::optional<double> recall;                // in [0, 1]
    std::optional<double> w2;                    // exact sample Wasserstein-2
    std::optional<double> robustness_practical;  // mean attack objective, squared units
    std::optional<double> per_input_std;
    std::optional<double> consistency_error;
    std::optional<double> ai_psnr;  // dB between clean and attacked inputs

    nlohmann::ordered_json to_json() const;
};

inline constexpr std::size_t kAssignmentCap = 4096;

// Exact empirical W2: sqrt of the minimal mean squared pairwise distance over
// perfect matchings. Requires equal sizes; sizes above `cap` are rejected
// (cubic assignment cost).
double wasserstein2_exact(const SampleSet& a, const SampleSet& b,
                          std::size_t cap = kAssignmentCap);

// k-NN manifold precision/recall in raw 2D coordinates (no feature
// projection). A point's radius is the distance to its k-th nearest neighbor
// within its own set, excluding itself; distance ties break by index order.
std::pair<double, double> precision_recall(const SampleSet& real_set, const SampleSet& fake_set,
                                           int k);

// Standard deviation of the free output coordinate across n_seeds draws.
double per_input_std(const Estimator& est, double y, int n_seeds, std::uint64_t seed = 0);

// Max over inputs of |output.x1 - y|; zero for every estimator here by
// construction.
double consistency_error(const Estimator& est, const std::vector<double>& inputs,
                         std::uint64_t seed = 0);

// 10*log10(peak^2 / MSE); +infinity when the vectors are identical.
double psnr(std::span<const double> a, std::span<const double> b, double peak);

// Squared exact W2 between m-sample conditional output sets at y and
// y + delta. Both sides use the same fresh seed list by default, mirroring
// the shared-seed coupling that makes the mean squared output change an upper
// bound on this quantity; pass shared_seeds = false for independent sides.
double w2_conditional_sensitivity(const Estimator& est, double y, double delta, int m,
                                  std::uint64_t seed, bool shared_seeds = true);

}  // namespace lab
