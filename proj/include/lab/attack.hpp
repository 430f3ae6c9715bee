#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "lab/estimators.hpp"

namespace lab {

enum class AttackMethod { ProjectedAdam, IFGSM };

// Inner-maximization settings: find the input perturbation inside the L2
// epsilon-ball that changes the estimator output the most, averaging the
// objective over n_seeds shared seed realizations.
struct AttackConfig {
    double epsilon = 1e-3;
    int steps = 4;
    double step_size = 1e-4;
    std::pair<double, double> adam_betas{0.9, 0.999};
    int n_seeds = 1;  // deterministic estimators use one zero seed
    AttackMethod method = AttackMethod::ProjectedAdam;
    double ifgsm_alpha = 0.0;

    void validate() const;

    // Toy-scale defaults: 4 Adam steps at 1e-4; 50 seed realizations for
    // stochastic estimators.
    static AttackConfig toy_default(bool stochastic);
    // Image-scale settings kept as a named preset only (5 steps at lr 1,
    // 10 seeds); nothing here runs at image scale.
    static AttackConfig image_preset();
};

// Mean over the seed list of ||G(y, z) - G(y + delta, z)||^2 with the seed
// shared across the pair.
double attack_objective(const Estimator& est, double y, double delta,
                        const std::vector<std::uint64_t>& seeds);

struct AttackResult {
    double delta_star = 0.0;
    double objective = 0.0;
};

// Projected-Adam ascent on delta, starting from zero, projected onto the
// epsilon-ball (intersected with the estimator domain) after every step.
// Fresh optimizer state per call; deterministic in (est, y, cfg, seed).
// Gradients are exact for Neural estimators and central finite differences
// otherwise.
AttackResult find_attack(const Estimator& est, double y, const AttackConfig& cfg,
                         std::uint64_t seed);

// Iterative fast-gradient-sign attack on the (by default unsquared) seed-
// averaged output-change loss: y~ <- y~ + alpha * sgn(d loss / d y~), with
// sgn(0) = +1 and the seed list fixed across steps. Returns the attacked
// input.
double ifgsm_attack(const Estimator& est, double y, double alpha, int steps, int n_seeds,
                    std::uint64_t seed, bool squared = false);

// Mean find_attack objective over the inputs.
double robustness_practical(const Estimator& est, const std::vector<double>& inputs,
                            const AttackConfig& cfg, std::uint64_t seed);

// Per-input attack results (robustness_practical is their objective mean).
std::vector<AttackResult> attack_sweep(const Estimator& est, const std::vector<double>& inputs,
                                       const AttackConfig& cfg, std::uint64_t seed);

// The fixed seed list used for one attack: zero for deterministic
// estimators, n_seeds derived streams otherwise.
std::vector<std::uint64_t> attack_seed_list(const Estimator& est, const AttackConfig& cfg,
                                            std::uint64_t seed);

}  // namespace lab
