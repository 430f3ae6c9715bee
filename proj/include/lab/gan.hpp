#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "lab/attack.hpp"
#include "lab/estimators.hpp"
#include "lab/metrics.hpp"
#include "lab/mlp.hpp"
#include "lab/types.hpp"

namespace lab {

// Training recipe for one consistent toy restoration GAN. The generator maps
// (y, z) to the free coordinate and the final estimate concatenates y back
// in, so consistency is structural. The critic judges 2D points only and
// never sees y as a separate conditioning input.
struct TrainConfig {
    std::vector<int> hidden_widths{512, 512, 512, 512};
    int total_steps = 20000;  // per network; generator and critic alternate
    int batch_size = 128;
    double lr = 1e-4;
    std::pair<double, double> adam_betas{0.0, 0.9};
    double r1_gamma = 10.0;
    double lambda_robust = 0.0;
    bool stochastic = false;  // false pins the seed channel to 0
    int seed_dim = 1;
    AttackConfig attack = AttackConfig::toy_default(false);
    int robust_loss_period = 1;  // generator steps between robustness terms
    std::size_t train_size = 100000;
    std::size_t val_size = 10000;
    std::uint64_t master_seed = 0;

    // Evaluation protocol.
    int eval_samples = 1000;
    int eval_k = 5;
    int eval_std_seeds = 32;
    bool eval_use_training_reals = false;  // default: fresh draws from the source
    bool eval_compute_w2 = true;

    void validate() const;
    std::vector<int> generator_sizes() const;  // 2 -> hidden... -> 1
    std::vector<int> critic_sizes() const;

    // Full-scale settings: widths 512, 20000 steps, 50 attack seeds for
    // stochastic models.
    static TrainConfig full_preset(bool stochastic, double lambda_robust);
    // CI-scale settings: widths 128, 4000 steps, batch 128, 8 attack seeds.
    static TrainConfig reduced_preset(bool stochastic, double lambda_robust);
};

struct TrainHistoryRow {
    int step = 0;
    double gen_loss = 0.0;     // non-saturating part
    double critic_loss = 0.0;  // softplus terms + R1 term
    double r1 = 0.0;           // (gamma/2) * mean ||grad_x D||^2
    double robust_loss = 0.0;  // lambda * mean attack objective (0 when skipped)
};

struct TrainedPair {
    MlpParams generator;  // input (y, z), scalar output
    MlpParams critic;     // input 2D point, scalar output
    bool stochastic = false;
    std::vector<TrainHistoryRow> history;

    Estimator estimator() const { return Estimator::neural(generator, stochastic); }
};

// Any non-finite loss aborts training; the error carries the state needed
// for a diagnostic dump.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(std::string msg, int step, std::vector<TrainHistoryRow> history)
        : std::runtime_error(std::move(msg)), step(step), history(std::move(history)) {}
    int step;
    std::vector<TrainHistoryRow> history;
};

// Mean softplus(-D(fake)).
double generator_loss(const MlpParams& critic, const std::vector<Point2>& fake_points);

// Mean softplus(-D(real)) + mean softplus(D(fake)) + (gamma/2) * mean
// ||grad_x D(real)||^2.
double critic_loss(const MlpParams& critic, const std::vector<Point2>& real_points,
                   const std::vector<Point2>& fake_points, double r1_gamma);

// critic_loss plus its exact parameter gradient (the training path). If
// r1_term is non-null it receives the (gamma/2)*mean||grad||^2 component.
std::pair<double, MlpGrads> critic_loss_grads(const MlpParams& critic,
                                              const std::vector<Point2>& real_points,
                                              const std::vector<Point2>& fake_points,
                                              double r1_gamma, double* r1_term = nullptr);

// (y, network(y, z)); z is uniform [0,1) from seed_value when stochastic,
// 0 otherwise.
Point2 generate(const MlpParams& generator, double y, std::uint64_t seed_value, bool stochastic);

// Alternating single-step training, fully deterministic in the master seed.
TrainedPair train(const TrainConfig& cfg);

// Draws eval_samples validation inputs (one seed per input for stochastic
// estimators), then reports precision/recall at eval_k, exact W2,
// robustness at the config attack, mean per-input std, consistency error,
// and the attack's input PSNR.
MetricsReport evaluate_estimator(const Estimator& est, const TrainConfig& cfg,
                                 std::uint64_t data_seed);
MetricsReport evaluate(const TrainedPair& pair, const TrainConfig& cfg, std::uint64_t data_seed);

}  // namespace lab
