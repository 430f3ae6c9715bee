#include "lab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "lab/assignment.hpp"
#include "lab/rng.hpp"

namespace lab {

nlohmann::ordered_json MetricsReport::to_json() const {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    auto put = [&j](const char* key, const std::optional<double>& v) {
        if (v && std::isfinite(*v)) j[key] = *v;
    };
    put("precision", precision);
    put("recall", recall);
    put("w2", w2);
    put("robustness_practical", robustness_practical);
    if (robustness_practical && std::isfinite(*robustness_practical))
        j["robustness_sqrt"] = std::sqrt(*robustness_practical);
    put("per_input_std", per_input_std);
    put("consistency_error", consistency_error);
    put("ai_psnr", ai_psnr);
    return j;
}

double wasserstein2_exact(const SampleSet& a, const SampleSet& b, std::size_t cap) {
    if (a.size() != b.size())
        throw std::invalid_argument("wasserstein2_exact: sample sets must have equal size");
    if (a.size() > cap)
        throw std::length_error("wasserstein2_exact: set size exceeds the assignment cap");
    const int n = static_cast<int>(a.size());
    std::vector<double> cost(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            cost[static_cast<std::size_t>(i) * n + j] =
                squared_distance(a.points()[i], b.points()[j]);
    const double total = min_cost_assignment(cost, n);
    return std::sqrt(std::max(0.0, total / n));
}

namespace {

// Distance from each point of `set` to its k-th nearest neighbor within the
// same set, self excluded; ties resolved by index order.
std::vector<double> knn_radii(const std::vector<Point2>& set, int k) {
    const std::size_t n = set.size();
    std::vector<double> radii(n);
    std::vector<std::pair<double, std::size_t>> d;
    d.reserve(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        d.clear();
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) d.emplace_back(squared_distance(set[i], set[j]), j);
        std::nth_element(d.begin(), d.begin() + (k - 1), d.end());
        radii[i] = std::sqrt(d[k - 1].first);
    }
    return radii;
}

double covered_fraction(const std::vector<Point2>& queries, const std::vector<Point2>& anchors,
                        const std::vector<double>& radii) {
    std::size_t covered = 0;
    for (const Point2& q : queries) {
        for (std::size_t j = 0; j < anchors.size(); ++j) {
            const double r = radii[j];
            if (squared_distance(q, anchors[j]) <= r * r) {
                ++covered;
                break;
            }
        }
    }
    return static_cast<double>(covered) / static_cast<double>(queries.size());
}

}  // namespace

std::pair<double, double> precision_recall(const SampleSet& real_set, const SampleSet& fake_set,
                                           int k) {
    if (k < 1)
        throw std::invalid_argument("precision_recall: k must be >= 1");
    if (static_cast<std::size_t>(k) >= real_set.size() ||
        static_cast<std::size_t>(k) >= fake_set.size())
        throw std::invalid_argument("precision_recall: sets must have more than k points");
    const std::vector<double> real_radii = knn_radii(real_set.points(), k);
    const std::vector<double> fake_radii = knn_radii(fake_set.points(), k);
    const double precision = covered_fraction(fake_set.points(), real_set.points(), real_radii);
    const double recall = covered_fraction(real_set.points(), fake_set.points(), fake_radii);
    return {precision, recall};
}

double per_input_std(const Estimator& est, double y, int n_seeds, std::uint64_t seed) {
    if (n_seeds < 2)
        throw std::invalid_argument("per_input_std: need at least two seeds");
    std::vector<double> x2s(static_cast<std::size_t>(n_seeds));
    if (est.kind() == Estimator::Kind::Neural) {
        std::vector<std::uint64_t> seeds(static_cast<std::size_t>(n_seeds));
        for (int i = 0; i < n_seeds; ++i) seeds[i] = derive_seed(seed, static_cast<std::uint64_t>(i));
        est.neural_outputs(y, seeds, x2s);
    } else {
        for (int i = 0; i < n_seeds; ++i)
            x2s[i] = est.estimate(y, derive_seed(seed, static_cast<std::uint64_t>(i))).x2;
    }
    double mean = 0.0;
    for (double v : x2s) mean += v;
    mean /= n_seeds;
    double ss = 0.0;
    for (double v : x2s) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / (n_seeds - 1));
}

double consistency_error(const Estimator& est, const std::vector<double>& inputs,
                         std::uint64_t seed) {
    if (inputs.empty())
        throw std::invalid_argument("consistency_error: empty input list");
    double worst = 0.0;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        const Point2 out = est.estimate(inputs[i], derive_seed(seed, i));
        worst = std::max(worst, std::fabs(out.x1 - inputs[i]));
    }
    return worst;
}

double psnr(std::span<const double> a, std::span<const double> b, double peak) {
    if (a.size() != b.size())
        throw std::invalid_argument("psnr: length mismatch");
    if (a.empty())
        throw std::invalid_argument("psnr: empty input");
    if (!(peak > 0.0))
        throw std::invalid_argument("psnr: peak must be positive");
    double mse = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        mse += d * d;
    }
    mse /= static_cast<double>(a.size());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(peak * peak / mse);
}

double w2_conditional_sensitivity(const Estimator& est, double y, double delta, int m,
                                  std::uint64_t seed, bool shared_seeds) {
    if (m < 1)
        throw std::invalid_argument("w2_conditional_sensitivity: m must be >= 1");
    if (static_cast<std::size_t>(m) > kAssignmentCap)
        throw std::length_error("w2_conditional_sensitivity: m exceeds the assignment cap");
    if (!est.domain().contains(y) || !est.domain().contains(y + delta))
        throw std::invalid_argument("w2_conditional_sensitivity: y or y+delta outside domain");

    const std::uint64_t seed_a = derive_seed(seed, "side-a");
    const std::uint64_t seed_b = shared_seeds ? seed_a : derive_seed(seed, "side-b");
    std::vector<Point2> a, b;
    a.reserve(m);
    b.reserve(m);
    for (int i = 0; i < m; ++i) {
        a.push_back(est.estimate(y, derive_seed(seed_a, static_cast<std::uint64_t>(i))));
        b.push_back(est.estimate(y + delta, derive_seed(seed_b, static_cast<std::uint64_t>(i))));
    }
    const double w2 = wasserstein2_exact(SampleSet(std::move(a), "cond-a"),
                                         SampleSet(std::move(b), "cond-b"));
    return w2 * w2;
}

}  // namespace lab
