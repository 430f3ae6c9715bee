#include "lab/gan.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lab/distributions.hpp"
#include "lab/rng.hpp"

namespace lab {

void TrainConfig::validate() const {
    if (hidden_widths.empty())
        throw std::invalid_argument("TrainConfig: need at least one hidden layer");
    for (int w : hidden_widths)
        if (w < 1)
            throw std::invalid_argument("TrainConfig: hidden widths must be >= 1");
    if (total_steps < 1)
        throw std::invalid_argument("TrainConfig: total_steps must be >= 1");
    if (batch_size < 1)
        throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
    if (!(lr > 0.0))
        throw std::invalid_argument("TrainConfig: lr must be positive");
    if (!(r1_gamma >= 0.0))
        throw std::invalid_argument("TrainConfig: r1_gamma must be >= 0");
    if (!(lambda_robust >= 0.0))
        throw std::invalid_argument("TrainConfig: lambda_R must be >= 0");
    if (robust_loss_period < 1)
        throw std::invalid_argument("TrainConfig: robust_loss_period must be >= 1");
    if (seed_dim != 1)
        throw std::invalid_argument("TrainConfig: only seed_dim = 1 is supported");
    if (train_size < static_cast<std::size_t>(batch_size))
        throw std::invalid_argument("TrainConfig: train_size smaller than a batch");
    if (val_size < static_cast<std::size_t>(eval_samples))
        throw std::invalid_argument("TrainConfig: val_size smaller than eval_samples");
    if (eval_k < 1 || eval_samples <= eval_k)
        throw std::invalid_argument("TrainConfig: need eval_samples > eval_k >= 1");
    if (eval_std_seeds < 2)
        throw std::invalid_argument("TrainConfig: eval_std_seeds must be >= 2");
    attack.validate();
}

std::vector<int> TrainConfig::generator_sizes() const {
    std::vector<int> sizes{2};
    sizes.insert(sizes.end(), hidden_widths.begin(), hidden_widths.end());
    sizes.push_back(1);
    return sizes;
}

std::vector<int> TrainConfig::critic_sizes() const { return generator_sizes(); }

TrainConfig TrainConfig::full_preset(bool stochastic, double lambda_robust) {
    TrainConfig cfg;
    cfg.stochastic = stochastic;
    cfg.lambda_robust = lambda_robust;
    cfg.attack = AttackConfig::toy_default(stochastic);
    return cfg;
}

TrainConfig TrainConfig::reduced_preset(bool stochastic, double lambda_robust) {
    TrainConfig cfg;
    cfg.hidden_widths = {128, 128, 128, 128};
    cfg.total_steps = 4000;
    cfg.batch_size = 128;
    cfg.stochastic = stochastic;
    cfg.lambda_robust = lambda_robust;
    cfg.attack = AttackConfig::toy_default(stochastic);
    cfg.attack.n_seeds = stochastic ? 8 : 1;
    // One attack step is a quarter radius so four steps can reach the ball
    // boundary at this scale.
    cfg.attack.step_size = cfg.attack.epsilon / 4.0;
    return cfg;
}

namespace {

double softplus(double x) { return std::log1p(std::exp(-std::fabs(x))) + std::max(x, 0.0); }
double sigmoid(double x) {
    return (x >= 0.0) ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

Eigen::MatrixXd to_matrix(const std::vector<Point2>& pts) {
    Eigen::MatrixXd m(2, static_cast<Eigen::Index>(pts.size()));
    for (std::size_t i = 0; i < pts.size(); ++i) {
        m(0, static_cast<Eigen::Index>(i)) = pts[i].x1;
        m(1, static_cast<Eigen::Index>(i)) = pts[i].x2;
    }
    return m;
}

// Shuffled epochs over [0, n); reshuffles deterministically at each epoch
// boundary.
class EpochSampler {
public:
    EpochSampler(std::size_t n, std::uint64_t seed) : n_(n), seed_(seed) { reshuffle(); }

    std::size_t next() {
        if (pos_ == n_) {
            ++epoch_;
            reshuffle();
        }
        return order_[pos_++];
    }

private:
    void reshuffle() {
        if (order_.empty()) {
            order_.resize(n_);
            for (std::size_t i = 0; i < n_; ++i) order_[i] = i;
        }
        CounterRng rng(derive_seed(seed_, epoch_));
        for (std::size_t i = n_; i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(rng.next_u64() % i);
            std::swap(order_[i - 1], order_[j]);
        }
        pos_ = 0;
    }

    std::size_t n_;
    std::uint64_t seed_;
    std::size_t epoch_ = 0;
    std::size_t pos_ = 0;
    std::vector<std::size_t> order_;
};

// z channel values for one stacked batch: block s holds seeds[s] expanded to
// all batch columns. Column order is s * batch + i throughout.
Eigen::MatrixXd stacked_inputs(const Eigen::VectorXd& ys, const Eigen::VectorXd& deltas,
                               const std::vector<double>& z_values) {
    const Eigen::Index b = ys.size();
    const Eigen::Index s = static_cast<Eigen::Index>(z_values.size());
    Eigen::MatrixXd in(2, b * s);
    for (Eigen::Index k = 0; k < s; ++k)
        for (Eigen::Index i = 0; i < b; ++i) {
            in(0, k * b + i) = ys(i) + (deltas.size() ? deltas(i) : 0.0);
            in(1, k * b + i) = z_values[static_cast<std::size_t>(k)];
        }
    return in;
}

struct BatchAttackResult {
    Eigen::VectorXd delta;      // per input
    Eigen::VectorXd objective;  // per input, at the final delta
};

// Projected-Adam attack on a whole batch at once; one Adam state per input.
// Mirrors find_attack for neural estimators but shares the forward/backward
// GEMMs across inputs and seed realizations.
BatchAttackResult batched_attack(const MlpParams& gen, const Eigen::VectorXd& ys,
                                 const std::vector<double>& z_values, const AttackConfig& cfg) {
    const Eigen::Index b = ys.size();
    const Eigen::Index s = static_cast<Eigen::Index>(z_values.size());
    const double inv_s = 1.0 / static_cast<double>(s);

    const Eigen::MatrixXd base_out = forward(gen, stacked_inputs(ys, {}, z_values));

    Eigen::VectorXd delta = Eigen::VectorXd::Zero(b);
    Eigen::VectorXd m = Eigen::VectorXd::Zero(b), v = Eigen::VectorXd::Zero(b);
    const auto [beta1, beta2] = cfg.adam_betas;

    for (int t = 1; t <= cfg.steps; ++t) {
        ForwardTrace trace;
        const Eigen::MatrixXd out = forward(gen, stacked_inputs(ys, delta, z_values), &trace);
        Eigen::MatrixXd input_grad;
        backward(gen, trace, Eigen::MatrixXd::Ones(1, b * s), &input_grad);

        Eigen::VectorXd g = 2.0 * delta;
        for (Eigen::Index k = 0; k < s; ++k)
            for (Eigen::Index i = 0; i < b; ++i) {
                const double diff = out(0, k * b + i) - base_out(0, k * b + i);
                g(i) += 2.0 * inv_s * diff * input_grad(0, k * b + i);
            }
        for (Eigen::Index i = 0; i < b; ++i) {
            double gi = g(i);
            if (gi == 0.0 && delta(i) == 0.0) gi = 1.0;  // leave the flat minimum
            m(i) = beta1 * m(i) + (1.0 - beta1) * gi;
            v(i) = beta2 * v(i) + (1.0 - beta2) * gi * gi;
            const double mhat = m(i) / (1.0 - std::pow(beta1, t));
            const double vhat = v(i) / (1.0 - std::pow(beta2, t));
            delta(i) += cfg.step_size * mhat / (std::sqrt(vhat) + 1e-8);
            delta(i) = std::clamp(delta(i), -cfg.epsilon, cfg.epsilon);
        }
    }

    const Eigen::MatrixXd out = forward(gen, stacked_inputs(ys, delta, z_values));
    Eigen::VectorXd objective = delta.array().square();
    for (Eigen::Index k = 0; k < s; ++k)
        for (Eigen::Index i = 0; i < b; ++i) {
            const double diff = out(0, k * b + i) - base_out(0, k * b + i);
            objective(i) += inv_s * diff * diff;
        }
    return {std::move(delta), std::move(objective)};
}

}  // namespace

double generator_loss(const MlpParams& critic, const std::vector<Point2>& fake_points) {
    if (critic.output_size() != 1)
        throw std::invalid_argument("generator_loss: critic must have scalar output");
    const Eigen::MatrixXd d = forward(critic, to_matrix(fake_points));
    double loss = 0.0;
    for (Eigen::Index i = 0; i < d.cols(); ++i) loss += softplus(-d(0, i));
    return loss / static_cast<double>(d.cols());
}

double critic_loss(const MlpParams& critic, const std::vector<Point2>& real_points,
                   const std::vector<Point2>& fake_points, double r1_gamma) {
    if (critic.output_size() != 1)
        throw std::invalid_argument("critic_loss: critic must have scalar output");
    const Eigen::MatrixXd d_real = forward(critic, to_matrix(real_points));
    const Eigen::MatrixXd d_fake = forward(critic, to_matrix(fake_points));
    double loss = 0.0;
    for (Eigen::Index i = 0; i < d_real.cols(); ++i) loss += softplus(-d_real(0, i));
    loss /= static_cast<double>(d_real.cols());
    double fl = 0.0;
    for (Eigen::Index i = 0; i < d_fake.cols(); ++i) fl += softplus(d_fake(0, i));
    loss += fl / static_cast<double>(d_fake.cols());
    loss += r1_gamma * r1_penalty(critic, to_matrix(real_points), nullptr);
    return loss;
}

std::pair<double, MlpGrads> critic_loss_grads(const MlpParams& critic,
                                              const std::vector<Point2>& real_points,
                                              const std::vector<Point2>& fake_points,
                                              double r1_gamma, double* r1_term) {
    const Eigen::MatrixXd real = to_matrix(real_points);
    const Eigen::MatrixXd fake = to_matrix(fake_points);
    const double nb_r = static_cast<double>(real.cols());
    const double nb_f = static_cast<double>(fake.cols());

    ForwardTrace tr_real, tr_fake;
    const Eigen::MatrixXd d_real = forward(critic, real, &tr_real);
    const Eigen::MatrixXd d_fake = forward(critic, fake, &tr_fake);

    double loss = 0.0;
    Eigen::MatrixXd og_real(1, real.cols()), og_fake(1, fake.cols());
    for (Eigen::Index i = 0; i < real.cols(); ++i) {
        loss += softplus(-d_real(0, i)) / nb_r;
        og_real(0, i) = -sigmoid(-d_real(0, i)) / nb_r;
    }
    for (Eigen::Index i = 0; i < fake.cols(); ++i) {
        loss += softplus(d_fake(0, i)) / nb_f;
        og_fake(0, i) = sigmoid(d_fake(0, i)) / nb_f;
    }

    MlpGrads grads = backward(critic, tr_real, og_real);
    axpy_grads(1.0, backward(critic, tr_fake, og_fake), grads);

    if (r1_term) *r1_term = 0.0;
    if (r1_gamma > 0.0) {
        MlpGrads r1_grads;
        const double penalty = r1_penalty(critic, real, &r1_grads);
        loss += r1_gamma * penalty;
        if (r1_term) *r1_term = r1_gamma * penalty;
        axpy_grads(r1_gamma, r1_grads, grads);
    }
    return {loss, std::move(grads)};
}

Point2 generate(const MlpParams& generator, double y, std::uint64_t seed_value, bool stochastic) {
    const double z = stochastic ? CounterRng(seed_value).next_unit() : 0.0;
    Eigen::MatrixXd in(2, 1);
    in << y, z;
    return {y, forward(generator, in)(0, 0)};
}

TrainedPair train(const TrainConfig& cfg) {
    cfg.validate();
    const std::uint64_t master = cfg.master_seed;

    TrainedPair pair;
    pair.stochastic = cfg.stochastic;
    // High-gain generator init: the starting curve already oscillates across
    // the disk, which is the regime these experiments study; the critic uses
    // the plain fan-in init.
    pair.generator = mlp_init(cfg.generator_sizes(), derive_seed(master, "generator-init"));
    for (MlpLayer& l : pair.generator.layers) l.weight *= 4.0;
    pair.critic = mlp_init(cfg.critic_sizes(), derive_seed(master, "critic-init"));

    AdamConfig adam_cfg{cfg.lr, cfg.adam_betas.first, cfg.adam_betas.second, 1e-8};
    AdamState gen_state = AdamState::init(pair.generator, adam_cfg);
    AdamState critic_state = AdamState::init(pair.critic, adam_cfg);

    const SampleSet train_set =
        sample(ToyDistribution::unit_disk(), cfg.train_size, derive_seed(master, "train-data"));
    EpochSampler real_iter(cfg.train_size, derive_seed(master, "real-shuffle"));
    EpochSampler y_iter(cfg.train_size, derive_seed(master, "y-shuffle"));
    CounterRng z_rng(derive_seed(master, "z-stream"));

    const Eigen::Index b = cfg.batch_size;
    const double inv_b = 1.0 / static_cast<double>(b);

    auto next_y_batch = [&](Eigen::VectorXd& ys, Eigen::VectorXd& zs) {
        ys.resize(b);
        zs.resize(b);
        for (Eigen::Index i = 0; i < b; ++i) {
            ys(i) = train_set.points()[y_iter.next()].x1;
            zs(i) = cfg.stochastic ? z_rng.next_unit() : 0.0;
        }
    };

    pair.history.reserve(static_cast<std::size_t>(cfg.total_steps));

    for (int step = 0; step < cfg.total_steps; ++step) {
        TrainHistoryRow row;
        row.step = step;

        // --- generator step
        {
            Eigen::VectorXd ys, zs;
            next_y_batch(ys, zs);
            Eigen::MatrixXd gen_in(2, b);
            gen_in.row(0) = ys.transpose();
            gen_in.row(1) = zs.transpose();

            ForwardTrace gen_trace;
            const Eigen::MatrixXd x2 = forward(pair.generator, gen_in, &gen_trace);
            Eigen::MatrixXd fake(2, b);
            fake.row(0) = ys.transpose();
            fake.row(1) = x2.row(0);

            ForwardTrace critic_trace;
            const Eigen::MatrixXd d_fake = forward(pair.critic, fake, &critic_trace);

            double gloss = 0.0;
            Eigen::MatrixXd og(1, b);
            for (Eigen::Index i = 0; i < b; ++i) {
                gloss += softplus(-d_fake(0, i)) * inv_b;
                og(0, i) = -sigmoid(-d_fake(0, i)) * inv_b;
            }
            Eigen::MatrixXd critic_in_grad;
            backward(pair.critic, critic_trace, og, &critic_in_grad);
            MlpGrads gen_grads =
                backward(pair.generator, gen_trace, critic_in_grad.row(1));

            row.gen_loss = gloss;

            const bool robust_now =
                cfg.lambda_robust > 0.0 && (step % cfg.robust_loss_period == 0);
            if (robust_now) {
                // Fresh seed realizations each step, shared across the pair
                // of evaluations; delta* is a constant in this gradient.
                const int n_seeds = cfg.stochastic ? cfg.attack.n_seeds : 1;
                std::vector<double> z_values(static_cast<std::size_t>(n_seeds), 0.0);
                if (cfg.stochastic) {
                    CounterRng zr(derive_seed(derive_seed(master, "attack-z"),
                                              static_cast<std::uint64_t>(step)));
                    for (double& z : z_values) z = zr.next_unit();
                }
                const BatchAttackResult att =
                    batched_attack(pair.generator, ys, z_values, cfg.attack);

                const Eigen::Index ns = static_cast<Eigen::Index>(z_values.size());
                ForwardTrace tr_base, tr_att;
                const Eigen::MatrixXd out_base =
                    forward(pair.generator, stacked_inputs(ys, {}, z_values), &tr_base);
                const Eigen::MatrixXd out_att =
                    forward(pair.generator, stacked_inputs(ys, att.delta, z_values), &tr_att);

                const double w = cfg.lambda_robust * inv_b / static_cast<double>(ns);
                Eigen::MatrixXd og_base(1, b * ns), og_att(1, b * ns);
                double robust_term = att.delta.array().square().mean();
                for (Eigen::Index k = 0; k < ns; ++k)
                    for (Eigen::Index i = 0; i < b; ++i) {
                        const double diff = out_base(0, k * b + i) - out_att(0, k * b + i);
                        robust_term +=
                            diff * diff * inv_b / static_cast<double>(ns);
                        og_base(0, k * b + i) = 2.0 * w * diff;
                        og_att(0, k * b + i) = -2.0 * w * diff;
                    }
                axpy_grads(1.0, backward(pair.generator, tr_base, og_base), gen_grads);
                axpy_grads(1.0, backward(pair.generator, tr_att, og_att), gen_grads);
                row.robust_loss = cfg.lambda_robust * robust_term;
            }

            adam_step(gen_state, pair.generator, gen_grads);
        }

        // --- critic step
        {
            Eigen::MatrixXd real(2, b);
            for (Eigen::Index i = 0; i < b; ++i) {
                const Point2 p = train_set.points()[real_iter.next()];
                real(0, i) = p.x1;
                real(1, i) = p.x2;
            }
            Eigen::VectorXd ys, zs;
            next_y_batch(ys, zs);
            Eigen::MatrixXd gen_in(2, b);
            gen_in.row(0) = ys.transpose();
            gen_in.row(1) = zs.transpose();
            const Eigen::MatrixXd x2 = forward(pair.generator, gen_in);

            std::vector<Point2> real_pts(static_cast<std::size_t>(b)),
                fake_pts(static_cast<std::size_t>(b));
            for (Eigen::Index i = 0; i < b; ++i) {
                real_pts[static_cast<std::size_t>(i)] = {real(0, i), real(1, i)};
                fake_pts[static_cast<std::size_t>(i)] = {ys(i), x2(0, i)};
            }
            double r1_term = 0.0;
            auto [closs, cgrads] =
                critic_loss_grads(pair.critic, real_pts, fake_pts, cfg.r1_gamma, &r1_term);
            row.critic_loss = closs;
            row.r1 = r1_term;
            adam_step(critic_state, pair.critic, cgrads);
        }

        pair.history.push_back(row);
        if (!std::isfinite(row.gen_loss) || !std::isfinite(row.critic_loss) ||
            !std::isfinite(row.robust_loss)) {
            std::ostringstream msg;
            msg << "training diverged at step " << step << " (gen=" << row.gen_loss
                << ", critic=" << row.critic_loss << ", robust=" << row.robust_loss << ")";
            throw DivergenceError(msg.str(), step, pair.history);
        }
    }
    return pair;
}

MetricsReport evaluate_estimator(const Estimator& est, const TrainConfig& cfg,
                                 std::uint64_t data_seed) {
    const std::size_t n = static_cast<std::size_t>(cfg.eval_samples);

    // Validation inputs: observed coordinates of a seeded pick from the
    // validation set (shared across models evaluated with the same seeds).
    const SampleSet val_set = sample(ToyDistribution::unit_disk(), cfg.val_size,
                                     derive_seed(cfg.master_seed, "val-data"));
    std::vector<std::size_t> order(val_set.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    CounterRng pick(derive_seed(data_seed, "val-pick"));
    for (std::size_t i = order.size(); i > 1; --i)
        std::swap(order[i - 1], order[static_cast<std::size_t>(pick.next_u64() % i)]);

    std::vector<double> ys(n);
    for (std::size_t i = 0; i < n; ++i) ys[i] = val_set.points()[order[i]].x1;

    // One output per input, one fresh seed each.
    std::vector<Point2> outputs(n);
    for (std::size_t i = 0; i < n; ++i)
        outputs[i] = est.estimate(ys[i], derive_seed(derive_seed(data_seed, "z"), i));
    const SampleSet fake(outputs, "outputs");

    const SampleSet real =
        cfg.eval_use_training_reals
            ? sample(ToyDistribution::unit_disk(), n, derive_seed(cfg.master_seed, "train-data"))
            : sample(ToyDistribution::unit_disk(), n, derive_seed(data_seed, "fresh-reals"));

    MetricsReport report;
    const auto [precision, recall] = precision_recall(real, fake, cfg.eval_k);
    report.precision = precision;
    report.recall = recall;
    if (cfg.eval_compute_w2 && n <= kAssignmentCap) report.w2 = wasserstein2_exact(real, fake);

    const std::vector<AttackResult> attacks =
        attack_sweep(est, ys, cfg.attack, derive_seed(data_seed, "attack"));
    double mean_obj = 0.0;
    std::vector<double> attacked(n);
    for (std::size_t i = 0; i < n; ++i) {
        mean_obj += attacks[i].objective;
        attacked[i] = ys[i] + attacks[i].delta_star;
    }
    report.robustness_practical = mean_obj / static_cast<double>(n);
    // Inputs live on [-1, 1]; peak = full range.
    report.ai_psnr = psnr(ys, attacked, 2.0);

    if (est.is_stochastic()) {
        double mean_std = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            mean_std +=
                per_input_std(est, ys[i], cfg.eval_std_seeds, derive_seed(data_seed, i));
        report.per_input_std = mean_std / static_cast<double>(n);
    } else {
        report.per_input_std = 0.0;
    }

    report.consistency_error = consistency_error(est, ys, derive_seed(data_seed, "cons"));
    return report;
}

MetricsReport evaluate(const TrainedPair& pair, const TrainConfig& cfg, std::uint64_t data_seed) {
    return evaluate_estimator(pair.estimator(), cfg, data_seed);
}

}  // namespace lab
