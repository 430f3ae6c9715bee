#include <doctest.h>

#include <cmath>

#include "lab/attack.hpp"
#include "lab/distributions.hpp"
#include "lab/rng.hpp"

using namespace lab;

namespace {

// consistent linear estimator (y, a*y) built as a 1-layer network
Estimator linear_estimator(double a) {
    MlpParams net;
    MlpLayer l;
    l.weight = Eigen::MatrixXd::Zero(1, 2);
    l.weight(0, 0) = a;
    l.bias = Eigen::VectorXd::Zero(1);
    net.layers.push_back(l);
    return Estimator::neural(net, false);
}

AttackConfig strong_attack(double epsilon) {
    AttackConfig cfg;
    cfg.epsilon = epsilon;
    cfg.steps = 50;
    cfg.step_size = epsilon / 4.0;
    cfg.n_seeds = 50;
    return cfg;
}

}  // namespace

TEST_CASE("attack objective basics") {
    const Estimator sine = Estimator::sine(1.0);
    CHECK(attack_objective(sine, 0.3, 0.0, {0}) == 0.0);

    // (y, c): only the copied coordinate moves
    const Estimator flat = linear_estimator(0.0);
    const double delta = 0.01;
    CHECK(attack_objective(flat, 0.2, delta, {0}) == doctest::Approx(delta * delta).epsilon(1e-12));

    // sine alpha=1 at y=0: squared output change is delta^2*(1 + cos^2(0)) to first order
    const double d = 1e-3;
    CHECK(attack_objective(sine, 0.0, d, {0}) == doctest::Approx(2.0 * d * d).epsilon(1e-3));

    CHECK_THROWS_AS(attack_objective(sine, 0.9995, 0.001, {0}), std::invalid_argument);
}

TEST_CASE("find_attack reaches the closed-form optimum on a linear estimator") {
    const double a = 2.0, eps = 1e-3;
    const Estimator est = linear_estimator(a);
    const AttackConfig cfg = strong_attack(eps);
    const AttackResult res = find_attack(est, 0.1, cfg, 7);
    const double best = eps * eps * (1.0 + a * a);
    CHECK(res.objective >= 0.99 * best);
    CHECK(std::fabs(res.delta_star) <= eps + 1e-12);
}

TEST_CASE("find_attack at a vanishing radius yields a vanishing objective") {
    const AttackConfig cfg = strong_attack(1e-12);
    const AttackResult res = find_attack(Estimator::sine(50.0), 0.2, cfg, 3);
    CHECK(res.objective <= 1e-18);
}

TEST_CASE("ball feasibility and determinism") {
    CounterRng rng(11);
    const std::vector<Estimator> ests = {Estimator::sine(50.0), Estimator::disk_posterior(),
                                         Estimator::neural(mlp_init({2, 8, 8, 1}, 5), true)};
    for (const Estimator& est : ests)
        for (int trial = 0; trial < 10; ++trial) {
            AttackConfig cfg;
            cfg.epsilon = 1e-4 + 1e-3 * rng.next_unit();
            cfg.steps = 1 + static_cast<int>(rng.next_u64() % 20);
            cfg.step_size = cfg.epsilon / 4.0;
            cfg.n_seeds = 8;
            const double y = 0.9 * rng.next_symmetric();
            const std::uint64_t seed = rng.next_u64();
            const AttackResult r1 = find_attack(est, y, cfg, seed);
            const AttackResult r2 = find_attack(est, y, cfg, seed);
            CHECK(std::fabs(r1.delta_star) <= cfg.epsilon + 1e-12);
            CHECK(r1.delta_star == r2.delta_star);
            CHECK(r1.objective == r2.objective);
            // iterates must stay evaluable near the domain edge as well
            const double dom = est.domain().hi;
            if (std::isfinite(dom)) {
                const AttackResult edge = find_attack(est, dom, cfg, seed);
                CHECK(dom + edge.delta_star <= dom + 1e-15);
            }
        }
}

TEST_CASE("attack beats a random direction on most inputs") {
    const Estimator est = Estimator::sine(50.0);
    const AttackConfig cfg = strong_attack(1e-3);
    CounterRng rng(13);
    int wins = 0;
    const int n = 50;
    for (int i = 0; i < n; ++i) {
        const double y = 0.95 * rng.next_symmetric();
        const double dir = (rng.next_unit() < 0.5) ? -1.0 : 1.0;
        const AttackResult found = find_attack(est, y, cfg, rng.next_u64());
        const double random_obj = attack_objective(est, y, dir * cfg.epsilon, {0});
        if (found.objective >= random_obj) ++wins;
    }
    CHECK(wins >= (n * 9) / 10);
}

TEST_CASE("erratic sine is more attackable than the smooth one") {
    const Estimator erratic = Estimator::sine(50.0);
    const Estimator smooth = Estimator::sine(1.0);
    const AttackConfig cfg = strong_attack(1e-3);
    const auto ys = sample_disk_marginal(100, 41);
    int erratic_wins = 0;
    for (std::size_t i = 0; i < ys.size(); ++i) {
        const double y = std::clamp(ys[i], -0.999, 0.999);
        const double oe = find_attack(erratic, y, cfg, derive_seed(42, i)).objective;
        const double os = find_attack(smooth, y, cfg, derive_seed(43, i)).objective;
        if (oe > os) ++erratic_wins;
    }
    CHECK(erratic_wins >= 95);
}

TEST_CASE("ifgsm basics") {
    const Estimator lin = linear_estimator(1.5);
    CHECK(ifgsm_attack(lin, 0.2, 0.0, 5, 1, 1) == 0.2);

    // one step from the kink moves +alpha (sgn(0) = +1)
    const double alpha = 0.01;
    const double one = ifgsm_attack(lin, 0.2, alpha, 1, 1, 1);
    CHECK(std::fabs(one - 0.2) == doctest::Approx(alpha).epsilon(1e-12));

    // objective is non-decreasing over steps for a linear estimator
    double prev = 0.0;
    for (int steps = 1; steps <= 6; ++steps) {
        const double yt = ifgsm_attack(lin, 0.2, alpha, steps, 1, 1);
        const double obj = std::fabs(yt - 0.2);
        CHECK(obj >= prev - 1e-15);
        prev = obj;
    }
}

TEST_CASE("robustness_practical on a flat estimator equals epsilon^2") {
    const Estimator flat = linear_estimator(0.0);
    const AttackConfig cfg = strong_attack(1e-3);
    CounterRng rng(3);
    std::vector<double> ys(20);
    for (auto& y : ys) y = rng.next_symmetric();
    const double r = robustness_practical(flat, ys, cfg, 99);
    CHECK(r == doctest::Approx(cfg.epsilon * cfg.epsilon).epsilon(1e-12));
}

TEST_CASE("upper bound: seed-averaged objective dominates the empirical conditional W2^2") {
    const Estimator post = Estimator::disk_posterior();
    const AttackConfig cfg = strong_attack(1e-3);
    const auto ys = sample_disk_marginal(25, 61);
    int passes = 0;
    for (std::size_t i = 0; i < ys.size(); ++i) {
        const double y = std::clamp(ys[i], -0.999, 0.999);
        const std::uint64_t seed = derive_seed(62, i);
        const AttackResult att = find_attack(post, y, cfg, seed);
        const auto seeds = attack_seed_list(post, cfg, seed);
        std::vector<double> terms(seeds.size());
        double mean = 0.0;
        for (std::size_t s = 0; s < seeds.size(); ++s) {
            terms[s] = squared_distance(post.estimate(y, seeds[s]),
                                        post.estimate(y + att.delta_star, seeds[s]));
            mean += terms[s];
        }
        mean /= static_cast<double>(terms.size());
        double var = 0.0;
        for (double t : terms) var += (t - mean) * (t - mean);
        var /= static_cast<double>(terms.size() - 1);
        const double se = std::sqrt(var / static_cast<double>(terms.size()));
        const double w2sq =
            w2_conditional_sensitivity(post, y, att.delta_star, 256, derive_seed(63, i));
        if (att.objective + 3.0 * se >= w2sq) ++passes;
    }
    CHECK(passes >= 24);
}

TEST_CASE("attack config validation") {
    AttackConfig cfg;
    cfg.epsilon = 0.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = AttackConfig{};
    cfg.steps = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = AttackConfig{};
    cfg.n_seeds = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    CHECK(AttackConfig::toy_default(true).n_seeds == 50);
    CHECK(AttackConfig::toy_default(false).n_seeds == 1);
    CHECK(AttackConfig::image_preset().steps == 5);
}
