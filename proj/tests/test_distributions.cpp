#include <doctest.h>

#include <cmath>

#include "lab/distributions.hpp"
#include "lab/metrics.hpp"
#include "lab/rng.hpp"

using namespace lab;

TEST_CASE("disk samples stay in the support") {
    const auto set = sample(ToyDistribution::unit_disk(), 1000, 7);
    for (const Point2& p : set.points()) CHECK(p.x1 * p.x1 + p.x2 * p.x2 <= 1.0);
}

TEST_CASE("disk moments match the closed-form values") {
    // Uniform disk: E[x1] = 0, E[x1^2] = 1/4.
    const auto set = sample(ToyDistribution::unit_disk(), 10000, 11);
    double mean = 0.0, second = 0.0;
    for (const Point2& p : set.points()) {
        mean += p.x1;
        second += p.x1 * p.x1;
    }
    mean /= 10000;
    second /= 10000;
    CHECK(std::fabs(mean) <= 3.0 * 0.5 / std::sqrt(10000.0));
    CHECK(std::fabs(second - 0.25) <= 0.02);
}

TEST_CASE("square sample means sit near 1/2") {
    const auto set = sample(ToyDistribution::unit_square(), 10000, 3);
    double m1 = 0.0, m2 = 0.0;
    for (const Point2& p : set.points()) {
        m1 += p.x1;
        m2 += p.x2;
    }
    CHECK(std::fabs(m1 / 10000 - 0.5) <= 0.02);
    CHECK(std::fabs(m2 / 10000 - 0.5) <= 0.02);
}

TEST_CASE("sampling is deterministic and rejects n = 0") {
    const auto a = sample(ToyDistribution::unit_disk(), 100, 5);
    const auto b = sample(ToyDistribution::unit_disk(), 100, 5);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a.points()[i].x1 == b.points()[i].x1);
        CHECK(a.points()[i].x2 == b.points()[i].x2);
    }
    CHECK_THROWS_AS(sample(ToyDistribution::unit_disk(), 0, 5), std::invalid_argument);
}

TEST_CASE("support membership") {
    const auto disk = ToyDistribution::unit_disk();
    CHECK(support_contains(disk, {0.0, 0.0}));
    CHECK(!support_contains(disk, {1.1, 0.0}));
    const auto annulus = ToyDistribution::ellipse_annulus({1.0, 0.5, 0.6, 0.3});
    CHECK(!support_contains(annulus, {0.0, 0.0}));  // the hole
    CHECK(support_contains(annulus, {0.0, 0.4}));
    CHECK(support_contains(annulus, {1.0, 0.0}));  // outer boundary is closed
    CHECK(support_contains(annulus, {0.6, 0.0}));  // inner boundary belongs to the support
}

TEST_CASE("every sampled point passes support_contains") {
    const std::vector<ToyDistribution> dists = {
        ToyDistribution::unit_disk(), ToyDistribution::unit_square(),
        ToyDistribution::ellipse_annulus(EllipseAnnulus::default_preset())};
    for (const auto& d : dists)
        for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
            const auto set = sample(d, 500, seed);
            for (const Point2& p : set.points()) REQUIRE(support_contains(d, p));
        }
}

TEST_CASE("ellipse annulus validation") {
    CHECK_THROWS_AS(ToyDistribution::ellipse_annulus({1.0, 0.5, 1.2, 0.3}),
                    std::invalid_argument);
    CHECK_THROWS_AS(ToyDistribution::ellipse_annulus({1.0, 0.5, 0.6, -0.1}),
                    std::invalid_argument);
}

TEST_CASE("disk posterior at the degenerate chord") {
    const auto set = posterior_sample_disk(1.0, 25, 9);
    for (const Point2& p : set.points()) {
        CHECK(p.x1 == 1.0);
        CHECK(p.x2 == 0.0);
    }
}

TEST_CASE("disk posterior chord statistics") {
    const auto at0 = posterior_sample_disk(0.0, 10000, 13);
    double mean = 0.0;
    for (const Point2& p : at0.points()) {
        REQUIRE(p.x1 == 0.0);
        REQUIRE(std::fabs(p.x2) <= 1.0);
        mean += p.x2;
    }
    CHECK(std::fabs(mean / 10000) <= 0.02);

    const auto at06 = posterior_sample_disk(0.6, 1000, 14);
    for (const Point2& p : at06.points()) REQUIRE(std::fabs(p.x2) <= 0.8);  // sqrt(1-0.36)

    CHECK_THROWS_AS(posterior_sample_disk(1.5, 10, 1), std::invalid_argument);
}

TEST_CASE("marginal density is a probability density with the right second moment") {
    // Quadrature oracle against the closed form: integral of p = 1 and
    // integral of x^2 p = 1/4 (matching the disk's E[x1^2]).
    const int n = 200000;
    double mass = 0.0, second = 0.0;
    const double h = 2.0 / n;
    for (int i = 0; i < n; ++i) {
        const double x = -1.0 + (i + 0.5) * h;
        const double p = disk_marginal_pdf(x);
        mass += p * h;
        second += x * x * p * h;
    }
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(second == doctest::Approx(0.25).epsilon(1e-4));
    CHECK(disk_marginal_pdf(2.0) == 0.0);
}

TEST_CASE("posterior composed with the marginal reproduces the disk") {
    // Joint draws vs a fresh disk sample: W2 statistically indistinguishable
    // from the two-fresh-samples baseline (ratio < 1.5). Reduced n keeps the
    // assignment fast here; the posterior-check scenario runs the full size.
    const std::size_t n = 1000;
    const auto ys = sample_disk_marginal(n, derive_seed(77, "ys"));
    std::vector<Point2> joint(n);
    for (std::size_t i = 0; i < n; ++i)
        joint[i] = posterior_draw_disk(ys[i], derive_seed(derive_seed(77, "z"), i));
    const SampleSet joint_set(joint, "joint");
    const auto d1 = sample(ToyDistribution::unit_disk(), n, derive_seed(77, "d1"));
    const auto d2 = sample(ToyDistribution::unit_disk(), n, derive_seed(77, "d2"));
    const auto d3 = sample(ToyDistribution::unit_disk(), n, derive_seed(77, "d3"));
    const double w_joint = wasserstein2_exact(joint_set, d3);
    const double w_base = wasserstein2_exact(d1, d2);
    CHECK(w_joint / w_base < 1.5);
}
