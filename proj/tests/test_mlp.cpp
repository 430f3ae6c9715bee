#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "lab/mlp.hpp"
#include "lab/rng.hpp"

using namespace lab;

namespace {

// Central finite differences of a scalar functional over every parameter.
// rel_tol applies where the analytic magnitude exceeds floor_mag.
template <typename Fn>
void check_param_grads(MlpParams params, const MlpGrads& analytic, Fn&& f, double step,
                       double rel_tol, double floor_mag = 1e-6) {
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        auto check_entry = [&](double& p, double g) {
            const double saved = p;
            p = saved + step;
            const double up = f(params);
            p = saved - step;
            const double dn = f(params);
            p = saved;
            const double fd = (up - dn) / (2.0 * step);
            if (std::fabs(g) > floor_mag || std::fabs(fd) > floor_mag) {
                const double rel = std::fabs(fd - g) / std::max(std::fabs(fd), std::fabs(g));
                CHECK(rel < rel_tol);
            }
        };
        for (Eigen::Index r = 0; r < params.layers[l].weight.rows(); ++r)
            for (Eigen::Index c = 0; c < params.layers[l].weight.cols(); ++c)
                check_entry(params.layers[l].weight(r, c), analytic[l].weight(r, c));
        for (Eigen::Index r = 0; r < params.layers[l].bias.size(); ++r)
            check_entry(params.layers[l].bias(r), analytic[l].bias(r));
    }
}

Eigen::VectorXd random_vec(int n, std::uint64_t seed) {
    CounterRng rng(seed);
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v(i) = rng.next_symmetric();
    return v;
}

}  // namespace

TEST_CASE("mlp_init: shapes, fan-in bound, zero biases, determinism") {
    const MlpParams p = mlp_init({2, 512, 512, 512, 512, 1}, 1);
    CHECK(p.layers.size() == 5);
    CHECK(p.input_size() == 2);
    CHECK(p.output_size() == 1);
    for (const MlpLayer& l : p.layers) {
        CHECK(l.bias.isZero(0.0));
        const double bound = 1.0 / std::sqrt(static_cast<double>(l.weight.cols()));
        CHECK(l.weight.cwiseAbs().maxCoeff() <= bound);
    }
    const MlpParams q = mlp_init({2, 512, 512, 512, 512, 1}, 1);
    for (std::size_t l = 0; l < p.layers.size(); ++l)
        CHECK(p.layers[l].weight == q.layers[l].weight);

    const MlpParams single = mlp_init({2, 1}, 3);
    CHECK(single.layers.size() == 1);
    CHECK(single.layers[0].bias(0) == 0.0);

    CHECK_THROWS_AS(mlp_init({2}, 1), std::invalid_argument);
    CHECK_THROWS_AS(mlp_init({2, 0, 1}, 1), std::invalid_argument);
}

TEST_CASE("forward: closed-form cases") {
    MlpParams zero;
    zero.layers.push_back({Eigen::MatrixXd::Zero(3, 2), Eigen::VectorXd::Zero(3)});
    zero.layers.push_back({Eigen::MatrixXd::Zero(1, 3), Eigen::VectorXd::Zero(1)});
    ForwardTrace trace;
    CHECK(forward(zero, random_vec(2, 1), trace)(0) == 0.0);

    MlpParams affine;
    Eigen::MatrixXd w(1, 2);
    w << 2.0, -1.0;
    Eigen::VectorXd b(1);
    b << 0.5;
    affine.layers.push_back({w, b});
    Eigen::VectorXd in(2);
    in << 1.0, 1.0;
    CHECK(forward(affine, in, trace)(0) == doctest::Approx(1.5).epsilon(1e-15));

    const MlpParams p = mlp_init({2, 16, 1}, 9);
    const Eigen::VectorXd x = random_vec(2, 4);
    ForwardTrace t1, t2;
    CHECK(forward(p, x, t1)(0) == forward(p, x, t2)(0));
    CHECK_THROWS_AS(forward(p, random_vec(3, 1), t1), std::invalid_argument);
}

TEST_CASE("forward in batch matches per-sample evaluation") {
    const MlpParams p = mlp_init({2, 8, 8, 1}, 17);
    Eigen::MatrixXd batch(2, 5);
    for (int i = 0; i < 5; ++i) batch.col(i) = random_vec(2, 100 + i);
    const Eigen::MatrixXd out = forward(p, batch);
    for (int i = 0; i < 5; ++i) {
        ForwardTrace t;
        CHECK(out(0, i) == forward(p, Eigen::VectorXd(batch.col(i)), t)(0));
    }
}

TEST_CASE("backward: single linear layer gives w^T * out_grad") {
    MlpParams p;
    Eigen::MatrixXd w(1, 3);
    w << 1.0, -2.0, 0.5;
    p.layers.push_back({w, Eigen::VectorXd::Zero(1)});
    ForwardTrace trace;
    forward(p, Eigen::MatrixXd(random_vec(3, 2)), &trace);
    Eigen::MatrixXd input_grad;
    backward(p, trace, Eigen::MatrixXd::Constant(1, 1, 2.0), &input_grad);
    CHECK(input_grad(0, 0) == 2.0 * 1.0);
    CHECK(input_grad(1, 0) == 2.0 * -2.0);
    CHECK(input_grad(2, 0) == 2.0 * 0.5);
}

TEST_CASE("backward matches finite differences on random small nets") {
    for (int trial = 0; trial < 20; ++trial) {
        const MlpParams p = mlp_init({2, 8, 8, 1}, 1000 + trial);
        const Eigen::VectorXd x = random_vec(2, 2000 + trial);
        ForwardTrace trace;
        forward(p, x, trace);
        Eigen::MatrixXd input_grad;
        const MlpGrads grads = backward(p, trace, Eigen::MatrixXd::Ones(1, 1), &input_grad);

        check_param_grads(
            p, grads,
            [&x](const MlpParams& q) {
                ForwardTrace t;
                return forward(q, x, t)(0);
            },
            1e-5, 1e-4);

        // input gradient against finite differences
        for (int i = 0; i < 2; ++i) {
            Eigen::VectorXd xp = x, xm = x;
            xp(i) += 1e-5;
            xm(i) -= 1e-5;
            ForwardTrace t;
            const double fd = (forward(p, xp, t)(0) - forward(p, xm, t)(0)) / 2e-5;
            if (std::fabs(fd) > 1e-6) {
                const double rel = std::fabs(fd - input_grad(i, 0)) /
                                   std::max(std::fabs(fd), std::fabs(input_grad(i, 0)));
                CHECK(rel < 1e-4);
            }
        }
    }
}

TEST_CASE("forward/backward never mutate the parameters") {
    const MlpParams p = mlp_init({2, 8, 1}, 3);
    const MlpParams copy = p;
    ForwardTrace trace;
    forward(p, Eigen::MatrixXd(random_vec(2, 1)), &trace);
    backward(p, trace, Eigen::MatrixXd::Ones(1, 1));
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
        CHECK(p.layers[l].weight == copy.layers[l].weight);
        CHECK(p.layers[l].bias == copy.layers[l].bias);
    }
}

TEST_CASE("r1 penalty: linear critic closed form") {
    MlpParams p;
    Eigen::MatrixXd w(1, 2);
    w << 0.3, -0.7;
    Eigen::VectorXd b(1);
    b << 0.2;
    p.layers.push_back({w, b});
    auto [penalty, grads] = r1_penalty_grad(p, random_vec(2, 5));
    CHECK(penalty == doctest::Approx(0.5 * (0.09 + 0.49)).epsilon(1e-15));
    CHECK(grads[0].weight(0, 0) == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(grads[0].weight(0, 1) == doctest::Approx(-0.7).epsilon(1e-15));
    CHECK(grads[0].bias(0) == 0.0);
}

TEST_CASE("r1 penalty: zero network") {
    MlpParams p;
    p.layers.push_back({Eigen::MatrixXd::Zero(4, 2), Eigen::VectorXd::Zero(4)});
    p.layers.push_back({Eigen::MatrixXd::Zero(1, 4), Eigen::VectorXd::Zero(1)});
    auto [penalty, grads] = r1_penalty_grad(p, random_vec(2, 6));
    CHECK(penalty == 0.0);
    for (const auto& g : grads) {
        CHECK(g.weight.isZero(0.0));
        CHECK(g.bias.isZero(0.0));
    }
}

TEST_CASE("r1 penalty gradient matches finite differences away from kinks") {
    int checked = 0;
    for (int trial = 0; trial < 12; ++trial) {
        const MlpParams p = mlp_init({2, 8, 1}, 3000 + trial);
        const Eigen::VectorXd x = random_vec(2, 4000 + trial);
        // skip points with a pre-activation within 1e-6 of zero
        ForwardTrace trace;
        forward(p, x, trace);
        bool near_kink = false;
        for (std::size_t l = 0; l + 1 < p.layers.size(); ++l)
            near_kink = near_kink || (trace.pre[l].cwiseAbs().minCoeff() < 1e-6);
        if (near_kink) continue;
        ++checked;

        auto [penalty, grads] = r1_penalty_grad(p, x);
        (void)penalty;
        check_param_grads(
            p, grads,
            [&x](const MlpParams& q) { return r1_penalty(q, Eigen::MatrixXd(x), nullptr); },
            1e-5, 1e-3);
    }
    CHECK(checked >= 8);
}

TEST_CASE("r1 penalty rejects non-scalar outputs") {
    const MlpParams p = mlp_init({2, 8, 2}, 1);
    CHECK_THROWS_AS(r1_penalty(p, Eigen::MatrixXd(random_vec(2, 1)), nullptr),
                    std::invalid_argument);
}

TEST_CASE("adam: zero gradient leaves parameters untouched") {
    MlpParams p = mlp_init({2, 4, 1}, 8);
    const MlpParams copy = p;
    AdamState st = AdamState::init(p, {});
    adam_step(st, p, zero_grads(p));
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
        CHECK(p.layers[l].weight == copy.layers[l].weight);
        CHECK(p.layers[l].bias == copy.layers[l].bias);
    }
    CHECK(st.t == 1);
}

TEST_CASE("adam: first-step magnitude is the learning rate") {
    MlpParams p;
    p.layers.push_back({Eigen::MatrixXd::Constant(1, 1, 2.0), Eigen::VectorXd::Zero(1)});
    AdamConfig cfg;
    cfg.lr = 1e-3;
    AdamState st = AdamState::init(p, cfg);
    MlpGrads g = zero_grads(p);
    g[0].weight(0, 0) = 0.37;  // any nonzero gradient
    adam_step(st, p, g);
    CHECK(std::fabs(p.layers[0].weight(0, 0) - 2.0) ==
          doctest::Approx(cfg.lr).epsilon(1e-6));
}

TEST_CASE("adam trajectories are bit-identical across runs") {
    auto run = [] {
        MlpParams p = mlp_init({2, 8, 1}, 77);
        AdamState st = AdamState::init(p, {1e-3, 0.0, 0.9, 1e-8});
        CounterRng rng(5);
        for (int i = 0; i < 50; ++i) {
            ForwardTrace trace;
            const Eigen::VectorXd x = random_vec(2, rng.next_u64());
            forward(p, x, trace);
            adam_step(st, p, backward(p, trace, Eigen::MatrixXd::Ones(1, 1)));
        }
        return p;
    };
    const MlpParams a = run(), b = run();
    for (std::size_t l = 0; l < a.layers.size(); ++l) {
        CHECK(a.layers[l].weight == b.layers[l].weight);
        CHECK(a.layers[l].bias == b.layers[l].bias);
    }
}

TEST_CASE("checkpoint round trip is bit exact") {
    const MlpParams p = mlp_init({2, 16, 8, 1}, 123);
    const auto path = std::filesystem::temp_directory_path() / "lab_test_ckpt.bin";
    save_checkpoint(p, path);
    const MlpParams q = load_checkpoint(path);
    REQUIRE(q.layers.size() == p.layers.size());
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
        CHECK(p.layers[l].weight == q.layers[l].weight);
        CHECK(p.layers[l].bias == q.layers[l].bias);
    }
    std::filesystem::remove(path);
}
