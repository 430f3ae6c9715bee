#include "lab/attack.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "lab/rng.hpp"

namespace lab {

void AttackConfig::validate() const {
    if (method == AttackMethod::ProjectedAdam && !(epsilon > 0.0))
        throw std::invalid_argument("AttackConfig: epsilon must be positive");
    if (steps < 1)
        throw std::invalid_argument("AttackConfig: steps must be >= 1");
    if (!(step_size > 0.0))
        throw std::invalid_argument("AttackConfig: step_size must be positive");
    if (n_seeds < 1)
        throw std::invalid_argument("AttackConfig: n_seeds must be >= 1");
    if (method == AttackMethod::IFGSM && ifgsm_alpha < 0.0)
        throw std::invalid_argument("AttackConfig: ifgsm_alpha must be >= 0");
}

AttackConfig AttackConfig::toy_default(bool stochastic) {
    AttackConfig cfg;
    cfg.epsilon = 1e-3;
    cfg.steps = 4;
    cfg.step_size = 1e-4;
    cfg.adam_betas = {0.9, 0.999};
    cfg.n_seeds = stochastic ? 50 : 1;
    return cfg;
}

AttackConfig AttackConfig::image_preset() {
    AttackConfig cfg;
    cfg.epsilon = 2.5;
    cfg.steps = 5;
    cfg.step_size = 1.0;
    cfg.adam_betas = {0.9, 0.999};
    cfg.n_seeds = 10;
    return cfg;
}

std::vector<std::uint64_t> attack_seed_list(const Estimator& est, const AttackConfig& cfg,
                                            std::uint64_t seed) {
    if (!est.is_stochastic()) return {0};
    std::vector<std::uint64_t> seeds(static_cast<std::size_t>(cfg.n_seeds));
    for (int i = 0; i < cfg.n_seeds; ++i)
        seeds[i] = derive_seed(seed, static_cast<std::uint64_t>(i));
    return seeds;
}

double attack_objective(const Estimator& est, double y, double delta,
                        const std::vector<std::uint64_t>& seeds) {
    if (seeds.empty())
        throw std::invalid_argument("attack_objective: empty seed list");
    if (!est.domain().contains(y) || !est.domain().contains(y + delta))
        throw std::invalid_argument("attack_objective: y or y+delta outside domain");
    double sum = 0.0;
    for (std::uint64_t s : seeds)
        sum += squared_distance(est.estimate(y, s), est.estimate(y + delta, s));
    return sum / static_cast<double>(seeds.size());
}

namespace {

struct Feasible {
    double lo, hi;  // delta range: epsilon ball intersected with the domain
    double clamp(double d) const { return std::clamp(d, lo, hi); }
};

Feasible feasible_range(const Estimator& est, double y, double epsilon) {
    const EstimatorDomain dom = est.domain();
    return {std::max(-epsilon, dom.lo - y), std::min(epsilon, dom.hi - y)};
}

// Objective value and d/d delta, exact for Neural, central differences
// otherwise (one-sided at the feasible boundary). The base outputs G(y, z)
// are precomputed by the caller.
class ObjectiveEval {
public:
    ObjectiveEval(const Estimator& est, double y, const std::vector<std::uint64_t>& seeds,
                  Feasible box)
        : est_(est), y_(y), seeds_(seeds), box_(box) {
        base_.reserve(seeds.size());
        if (est.kind() == Estimator::Kind::Neural) {
            est.neural_outputs(y, seeds, base_x2_);
            for (double x2 : base_x2_) base_.push_back({y, x2});
        } else {
            for (std::uint64_t s : seeds) base_.push_back(est_.estimate(y_, s));
        }
    }

    double value(double delta) const {
        double sum = 0.0;
        if (est_.kind() == Estimator::Kind::Neural) {
            std::vector<double> x2s;
            est_.neural_outputs(y_ + delta, seeds_, x2s);
            for (std::size_t i = 0; i < seeds_.size(); ++i) {
                const double dx2 = x2s[i] - base_[i].x2;
                sum += delta * delta + dx2 * dx2;
            }
        } else {
            for (std::size_t i = 0; i < seeds_.size(); ++i)
                sum += squared_distance(base_[i], est_.estimate(y_ + delta, seeds_[i]));
        }
        return sum / static_cast<double>(seeds_.size());
    }

    double gradient(double delta) const {
        if (est_.kind() == Estimator::Kind::Neural) {
            std::vector<double> x2s, slopes;
            est_.neural_outputs(y_ + delta, seeds_, x2s, &slopes);
            double g = 0.0;
            for (std::size_t i = 0; i < seeds_.size(); ++i)
                g += 2.0 * delta + 2.0 * (x2s[i] - base_[i].x2) * slopes[i];
            return g / static_cast<double>(seeds_.size());
        }
        const double h = 1e-7 * std::max(1.0, std::fabs(y_ + delta));
        const double dp = std::min(delta + h, box_.hi);
        const double dm = std::max(delta - h, box_.lo);
        if (dp == dm) return 0.0;
        return (value(dp) - value(dm)) / (dp - dm);
    }

    // Per-seed objective terms at delta (for standard-error reporting).
    std::vector<double> per_seed(double delta) const {
        std::vector<double> terms;
        terms.reserve(seeds_.size());
        for (std::size_t i = 0; i < seeds_.size(); ++i)
            terms.push_back(squared_distance(base_[i], est_.estimate(y_ + delta, seeds_[i])));
        return terms;
    }

private:
    const Estimator& est_;
    double y_;
    const std::vector<std::uint64_t>& seeds_;
    Feasible box_;
    std::vector<Point2> base_;
    std::vector<double> base_x2_;
};

}  // namespace

AttackResult find_attack(const Estimator& est, double y, const AttackConfig& cfg,
                         std::uint64_t seed) {
    cfg.validate();
    if (!est.domain().contains(y))
        throw std::invalid_argument("find_attack: y outside domain");

    const std::vector<std::uint64_t> seeds = attack_seed_list(est, cfg, seed);
    const Feasible box = feasible_range(est, y, cfg.epsilon);
    ObjectiveEval obj(est, y, seeds, box);

    double delta = 0.0, m = 0.0, v = 0.0;
    const auto [beta1, beta2] = cfg.adam_betas;
    for (int t = 1; t <= cfg.steps; ++t) {
        double g = obj.gradient(delta);
        // The objective has a flat minimum at delta = 0; break the tie
        // toward +1 so the ascent can leave it.
        if (g == 0.0 && delta == 0.0) g = 1.0;
        m = beta1 * m + (1.0 - beta1) * g;
        v = beta2 * v + (1.0 - beta2) * g * g;
        const double mhat = m / (1.0 - std::pow(beta1, t));
        const double vhat = v / (1.0 - std::pow(beta2, t));
        delta += cfg.step_size * mhat / (std::sqrt(vhat) + 1e-8);
        delta = box.clamp(delta);
    }
    return {delta, obj.value(delta)};
}

double ifgsm_attack(const Estimator& est, double y, double alpha, int steps, int n_seeds,
                    std::uint64_t seed, bool squared) {
    if (steps < 1)
        throw std::invalid_argument("ifgsm_attack: steps must be >= 1");
    if (n_seeds < 1)
        throw std::invalid_argument("ifgsm_attack: n_seeds must be >= 1");
    if (!est.domain().contains(y))
        throw std::invalid_argument("ifgsm_attack: y outside domain");

    AttackConfig tmp;
    tmp.n_seeds = n_seeds;
    const std::vector<std::uint64_t> seeds = attack_seed_list(est, tmp, seed);
    std::vector<Point2> base;
    base.reserve(seeds.size());
    for (std::uint64_t s : seeds) base.push_back(est.estimate(y, s));

    const EstimatorDomain dom = est.domain();
    auto loss = [&](double yt) {
        double sum = 0.0;
        for (std::size_t i = 0; i < seeds.size(); ++i) {
            const double sq = squared_distance(base[i], est.estimate(yt, seeds[i]));
            sum += squared ? sq : std::sqrt(sq);
        }
        return sum / static_cast<double>(seeds.size());
    };

    double yt = y;
    for (int t = 0; t < steps; ++t) {
        double g;
        if (est.has_exact_gradient()) {
            std::vector<double> x2s, slopes;
            est.neural_outputs(yt, seeds, x2s, &slopes);
            g = 0.0;
            for (std::size_t i = 0; i < seeds.size(); ++i) {
                const double d1 = yt - base[i].x1;
                const double d2 = x2s[i] - base[i].x2;
                if (squared) {
                    g += 2.0 * d1 + 2.0 * d2 * slopes[i];
                } else {
                    const double norm = std::sqrt(d1 * d1 + d2 * d2);
                    if (norm > 0.0) g += (d1 + d2 * slopes[i]) / norm;
                }
            }
            g /= static_cast<double>(seeds.size());
        } else {
            const double h = 1e-7 * std::max(1.0, std::fabs(yt));
            const double yp = std::min(yt + h, dom.hi);
            const double ym = std::max(yt - h, dom.lo);
            g = (yp == ym) ? 0.0 : (loss(yp) - loss(ym)) / (yp - ym);
        }
        const double sgn = (g >= 0.0) ? 1.0 : -1.0;  // sgn(0) = +1
        yt = std::clamp(yt + alpha * sgn, dom.lo, dom.hi);
    }
    return yt;
}

std::vector<AttackResult> attack_sweep(const Estimator& est, const std::vector<double>& inputs,
                                       const AttackConfig& cfg, std::uint64_t seed) {
    std::vector<AttackResult> results;
    results.reserve(inputs.size());
    for (std::size_t i = 0; i < inputs.size(); ++i)
        results.push_back(find_attack(est, inputs[i], cfg, derive_seed(seed, i)));
    return results;
}

double robustness_practical(const Estimator& est, const std::vector<double>& inputs,
                            const AttackConfig& cfg, std::uint64_t seed) {
    if (inputs.empty())
        throw std::invalid_argument("robustness_practical: empty input list");
    const std::vector<AttackResult> results = attack_sweep(est, inputs, cfg, seed);
    double sum = 0.0;
    for (const AttackResult& r : results) sum += r.objective;
    return sum / static_cast<double>(results.size());
}

}  // namespace lab
