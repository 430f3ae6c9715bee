#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace lab {

// Fully-connected ReLU network with hand-written reverse-mode gradients.
// Eigen supplies the matrix arithmetic; all differentiation logic lives here.
// Layers apply y = W x + b with ReLU between layers and none after the last.

struct MlpLayer {
    Eigen::MatrixXd weight;  // out x in
    Eigen::VectorXd bias;    // out
};

struct MlpParams {
    std::vector<MlpLayer> layers;

    int input_size() const { return static_cast<int>(layers.front().weight.cols()); }
    int output_size() const { return static_cast<int>(layers.back().weight.rows()); }
    std::vector<int> layer_sizes() const;
    void validate() const;  // dimension chaining + finiteness
};

// Gradients share the layer shapes.
using MlpGrads = std::vector<MlpLayer>;

MlpGrads zero_grads(const MlpParams& params);
void axpy_grads(double a, const MlpGrads& x, MlpGrads& y);  // y += a*x

// Weights ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)), biases zero, deterministic in
// seed (drawn layer by layer, row-major).
MlpParams mlp_init(const std::vector<int>& layer_sizes, std::uint64_t seed);

// Retained intermediates for the backward pass. Columns are batch samples.
struct ForwardTrace {
    Eigen::MatrixXd input;
    std::vector<Eigen::MatrixXd> pre;  // pre-activations per layer
    std::vector<Eigen::MatrixXd> act;  // post-activations (last layer: identity)
};

// Batched forward; columns of `input` are independent samples. Pure: params
// are never mutated.
Eigen::MatrixXd forward(const MlpParams& params, const Eigen::MatrixXd& input,
                        ForwardTrace* trace = nullptr);

// Gradients of sum_j <out_grad_j, output_j> over the batch. The per-sample
// contributions are reduced by the GEMM in a fixed order, so results are
// deterministic. ReLU subgradient at 0 is 0. If `input_grad` is non-null it
// receives d/d(input), same shape as the input.
MlpGrads backward(const MlpParams& params, const ForwardTrace& trace,
                  const Eigen::MatrixXd& out_grad, Eigen::MatrixXd* input_grad = nullptr);

// Single-sample convenience wrappers.
Eigen::VectorXd forward(const MlpParams& params, const Eigen::VectorXd& input,
                        ForwardTrace& trace);

// Mean over batch columns of the penalty 0.5*||d output / d input||^2 for a
// scalar-output network, plus its exact parameter gradient computed by a
// second (tangent) pass with the ReLU activation pattern held fixed. Bias
// gradients of the penalty vanish identically under the fixed pattern.
double r1_penalty(const MlpParams& params, const Eigen::MatrixXd& input, MlpGrads* grads);

// Per-point operation used by the trainer's contract tests.
std::pair<double, MlpGrads> r1_penalty_grad(const MlpParams& params,
                                            const Eigen::VectorXd& input);

struct AdamConfig {
    double lr = 1e-4;
    double beta1 = 0.0;
    double beta2 = 0.9;
    double eps = 1e-8;
};

struct AdamState {
    AdamConfig cfg;
    MlpGrads m;  // first moments
    MlpGrads v;  // second moments, entrywise >= 0
    long t = 0;

    static AdamState init(const MlpParams& params, AdamConfig cfg);
};

// Standard bias-corrected Adam; increments state.t.
void adam_step(AdamState& state, MlpParams& params, const MlpGrads& grads);

// Flat little-endian binary checkpoint:
//   magic "MLP1", u32 version, u32 layer count, u32 sizes[count+1],
//   then per layer: weight row-major f64, bias f64.
void save_checkpoint(const MlpParams& params, const std::filesystem::path& path);
MlpParams load_checkpoint(const std::filesystem::path& path);

}  // namespace lab
