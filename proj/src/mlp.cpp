#include "lab/mlp.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "lab/rng.hpp"

namespace lab {

std::vector<int> MlpParams::layer_sizes() const {
    std::vector<int> sizes;
    sizes.push_back(input_size());
    for (const MlpLayer& l : layers) sizes.push_back(static_cast<int>(l.weight.rows()));
    return sizes;
}

void MlpParams::validate() const {
    if (layers.empty())
        throw std::invalid_argument("MlpParams: no layers");
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const MlpLayer& l = layers[i];
        if (l.bias.size() != l.weight.rows())
            throw std::invalid_argument("MlpParams: bias/weight row mismatch");
        if (i > 0 && l.weight.cols() != layers[i - 1].weight.rows())
            throw std::invalid_argument("MlpParams: layer dimensions do not chain");
        if (!l.weight.allFinite() || !l.bias.allFinite())
            throw std::invalid_argument("MlpParams: non-finite entry");
    }
}

MlpGrads zero_grads(const MlpParams& params) {
    MlpGrads g;
    g.reserve(params.layers.size());
    for (const MlpLayer& l : params.layers)
        g.push_back({Eigen::MatrixXd::Zero(l.weight.rows(), l.weight.cols()),
                     Eigen::VectorXd::Zero(l.bias.size())});
    return g;
}

void axpy_grads(double a, const MlpGrads& x, MlpGrads& y) {
    for (std::size_t i = 0; i < y.size(); ++i) {
        y[i].weight += a * x[i].weight;
        y[i].bias += a * x[i].bias;
    }
}

MlpParams mlp_init(const std::vector<int>& layer_sizes, std::uint64_t seed) {
    if (layer_sizes.size() < 2)
        throw std::invalid_argument("mlp_init: need at least input and output sizes");
    for (int s : layer_sizes)
        if (s < 1)
            throw std::invalid_argument("mlp_init: sizes must be >= 1");

    MlpParams params;
    for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
        const int in = layer_sizes[l];
        const int out = layer_sizes[l + 1];
        CounterRng rng(derive_seed(seed, l));
        const double bound = 1.0 / std::sqrt(static_cast<double>(in));
        MlpLayer layer;
        layer.weight.resize(out, in);
        for (int r = 0; r < out; ++r)
            for (int c = 0; c < in; ++c) layer.weight(r, c) = bound * rng.next_symmetric();
        layer.bias = Eigen::VectorXd::Zero(out);
        params.layers.push_back(std::move(layer));
    }
    return params;
}

Eigen::MatrixXd forward(const MlpParams& params, const Eigen::MatrixXd& input,
                        ForwardTrace* trace) {
    if (input.rows() != params.input_size())
        throw std::invalid_argument("forward: input size mismatch");
    if (trace) {
        trace->input = input;
        trace->pre.clear();
        trace->act.clear();
    }
    Eigen::MatrixXd a = input;
    const std::size_t last = params.layers.size() - 1;
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        Eigen::MatrixXd z = (params.layers[l].weight * a).colwise() + params.layers[l].bias;
        if (trace) trace->pre.push_back(z);
        a = (l == last) ? z : z.cwiseMax(0.0).eval();
        if (trace) trace->act.push_back(a);
    }
    return a;
}

Eigen::VectorXd forward(const MlpParams& params, const Eigen::VectorXd& input,
                        ForwardTrace& trace) {
    return forward(params, Eigen::MatrixXd(input), &trace).col(0);
}

MlpGrads backward(const MlpParams& params, const ForwardTrace& trace,
                  const Eigen::MatrixXd& out_grad, Eigen::MatrixXd* input_grad) {
    const std::size_t n_layers = params.layers.size();
    if (trace.pre.size() != n_layers)
        throw std::invalid_argument("backward: trace does not match params");
    if (out_grad.rows() != params.output_size() || out_grad.cols() != trace.input.cols())
        throw std::invalid_argument("backward: out_grad shape mismatch");

    MlpGrads grads = zero_grads(params);
    Eigen::MatrixXd delta = out_grad;
    for (std::size_t l = n_layers; l-- > 0;) {
        if (l + 1 < n_layers)  // ReLU mask; derivative at exactly 0 is 0
            delta = (trace.pre[l].array() > 0.0).select(delta, 0.0);
        const Eigen::MatrixXd& below = (l == 0) ? trace.input : trace.act[l - 1];
        grads[l].weight = delta * below.transpose();
        grads[l].bias = delta.rowwise().sum();
        if (l > 0 || input_grad)
            delta = (params.layers[l].weight.transpose() * delta).eval();
    }
    if (input_grad) *input_grad = delta;
    return grads;
}

double r1_penalty(const MlpParams& params, const Eigen::MatrixXd& input, MlpGrads* grads) {
    if (params.output_size() != 1)
        throw std::invalid_argument("r1_penalty: network must have scalar output");

    ForwardTrace trace;
    forward(params, input, &trace);
    const std::size_t n_layers = params.layers.size();
    const Eigen::Index batch = input.cols();

    // Reverse pass from a unit output adjoint: deltas[l] is d output / d pre_l
    // under the frozen ReLU pattern; the input gradient is W_0^T deltas[0].
    std::vector<Eigen::MatrixXd> deltas(n_layers);
    Eigen::MatrixXd delta = Eigen::MatrixXd::Ones(1, batch);
    for (std::size_t l = n_layers; l-- > 0;) {
        if (l + 1 < n_layers)
            delta = (trace.pre[l].array() > 0.0).select(delta, 0.0);
        deltas[l] = delta;
        delta = (params.layers[l].weight.transpose() * delta).eval();
    }
    const Eigen::MatrixXd input_grad = delta;  // one column per sample

    const double penalty = 0.5 * input_grad.colwise().squaredNorm().mean();

    if (grads) {
        // Tangent pass seeded with the input gradient itself. With the mask
        // pattern fixed the network is linear, so d(0.5*||g||^2)/dW_l is the
        // outer product deltas[l] * a_dot_{l-1}^T; bias terms drop out.
        *grads = zero_grads(params);
        Eigen::MatrixXd a_dot = input_grad;
        const double scale = 1.0 / static_cast<double>(batch);
        for (std::size_t l = 0; l < n_layers; ++l) {
            (*grads)[l].weight = scale * (deltas[l] * a_dot.transpose());
            if (l + 1 < n_layers) {
                Eigen::MatrixXd z_dot = params.layers[l].weight * a_dot;
                a_dot = (trace.pre[l].array() > 0.0).select(z_dot, 0.0);
            }
        }
    }
    return penalty;
}

std::pair<double, MlpGrads> r1_penalty_grad(const MlpParams& params,
                                            const Eigen::VectorXd& input) {
    MlpGrads grads;
    const double penalty = r1_penalty(params, Eigen::MatrixXd(input), &grads);
    return {penalty, std::move(grads)};
}

AdamState AdamState::init(const MlpParams& params, AdamConfig cfg) {
    AdamState st;
    st.cfg = cfg;
    st.m = zero_grads(params);
    st.v = zero_grads(params);
    return st;
}

namespace {

void adam_apply(const AdamConfig& cfg, long t, double* m, double* v, const double* g, double* p,
                Eigen::Index n) {
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
    for (Eigen::Index i = 0; i < n; ++i) {
        m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
        v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
        p[i] -= cfg.lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + cfg.eps);
    }
}

}  // namespace

void adam_step(AdamState& state, MlpParams& params, const MlpGrads& grads) {
    if (grads.size() != params.layers.size())
        throw std::invalid_argument("adam_step: grads/params shape mismatch");
    state.t += 1;
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        MlpLayer& p = params.layers[l];
        const MlpLayer& g = grads[l];
        if (g.weight.rows() != p.weight.rows() || g.weight.cols() != p.weight.cols() ||
            g.bias.size() != p.bias.size())
            throw std::invalid_argument("adam_step: grads/params shape mismatch");
        adam_apply(state.cfg, state.t, state.m[l].weight.data(), state.v[l].weight.data(),
                   g.weight.data(), p.weight.data(), p.weight.size());
        adam_apply(state.cfg, state.t, state.m[l].bias.data(), state.v[l].bias.data(),
                   g.bias.data(), p.bias.data(), p.bias.size());
    }
}

namespace {

constexpr std::uint32_t kMagic = 0x3150'4C4Du;  // "MLP1" little-endian
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ostream& os, std::uint32_t x) {
    unsigned char b[4] = {static_cast<unsigned char>(x), static_cast<unsigned char>(x >> 8),
                          static_cast<unsigned char>(x >> 16),
                          static_cast<unsigned char>(x >> 24)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    return std::uint32_t(b[0]) | std::uint32_t(b[1]) << 8 | std::uint32_t(b[2]) << 16 |
           std::uint32_t(b[3]) << 24;
}

void put_f64(std::ostream& os, double x) {
    const std::uint64_t u = std::bit_cast<std::uint64_t>(x);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(u >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), 8);
}

double get_f64(std::istream& is) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t u = 0;
    for (int i = 0; i < 8; ++i) u |= std::uint64_t(b[i]) << (8 * i);
    return std::bit_cast<double>(u);
}

}  // namespace

void save_checkpoint(const MlpParams& params, const std::filesystem::path& path) {
    params.validate();
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw std::runtime_error("save_checkpoint: cannot open " + path.string());
    put_u32(os, kMagic);
    put_u32(os, kVersion);
    const std::vector<int> sizes = params.layer_sizes();
    put_u32(os, static_cast<std::uint32_t>(params.layers.size()));
    for (int s : sizes) put_u32(os, static_cast<std::uint32_t>(s));
    for (const MlpLayer& l : params.layers) {
        for (Eigen::Index r = 0; r < l.weight.rows(); ++r)
            for (Eigen::Index c = 0; c < l.weight.cols(); ++c) put_f64(os, l.weight(r, c));
        for (Eigen::Index r = 0; r < l.bias.size(); ++r) put_f64(os, l.bias(r));
    }
    if (!os)
        throw std::runtime_error("save_checkpoint: write failed for " + path.string());
}

MlpParams load_checkpoint(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw std::runtime_error("load_checkpoint: cannot open " + path.string());
    if (get_u32(is) != kMagic)
        throw std::runtime_error("load_checkpoint: bad magic in " + path.string());
    if (get_u32(is) != kVersion)
        throw std::runtime_error("load_checkpoint: unsupported version in " + path.string());
    const std::uint32_t n_layers = get_u32(is);
    if (n_layers == 0 || n_layers > 1024)
        throw std::runtime_error("load_checkpoint: implausible layer count");
    std::vector<int> sizes(n_layers + 1);
    for (auto& s : sizes) s = static_cast<int>(get_u32(is));
    MlpParams params;
    for (std::uint32_t l = 0; l < n_layers; ++l) {
        MlpLayer layer;
        layer.weight.resize(sizes[l + 1], sizes[l]);
        for (Eigen::Index r = 0; r < layer.weight.rows(); ++r)
            for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) layer.weight(r, c) = get_f64(is);
        layer.bias.resize(sizes[l + 1]);
        for (Eigen::Index r = 0; r < layer.bias.size(); ++r) layer.bias(r) = get_f64(is);
        params.layers.push_back(std::move(layer));
    }
    if (!is)
        throw std::runtime_error("load_checkpoint: truncated file " + path.string());
    params.validate();
    return params;
}

}  // namespace lab
