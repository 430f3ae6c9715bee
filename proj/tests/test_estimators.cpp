#include <doctest.h>

#include <cmath>

#include "lab/estimators.hpp"
#include "lab/rng.hpp"

using namespace lab;

TEST_CASE("sine estimator closed-form values") {
    CHECK(sine_estimate(50.0, 0.0).x2 == 0.0);
    CHECK(sine_estimate(1.0, 1.0).x2 == 0.0);
    const Point2 p = sine_estimate(1.0, 0.5);
    CHECK(p.x1 == 0.5);
    CHECK(p.x2 == doctest::Approx(std::sqrt(0.75) * std::sin(0.5)).epsilon(1e-15));
    CHECK_THROWS_AS(sine_estimate(1.0, 1.5), std::invalid_argument);
}

TEST_CASE("sine outputs stay inside the unit disk") {
    CounterRng rng(5);
    for (int i = 0; i < 1000; ++i) {
        const double y = rng.next_symmetric();
        const Point2 p = sine_estimate(50.0, y);
        CHECK(p.x1 * p.x1 + p.x2 * p.x2 <= 1.0 + 1e-15);
    }
}

TEST_CASE("zigzag estimator values") {
    CHECK(zigzag_estimate(3, 0.0).x2 == 0.0);
    CHECK(zigzag_estimate(1, 0.5).x2 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(zigzag_estimate(2, 0.25).x2 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(zigzag_estimate(2, 0.5).x2 == doctest::Approx(0.0).epsilon(1e-9));
    CHECK_THROWS_AS(zigzag_estimate(1, -0.1), std::invalid_argument);
    CHECK_THROWS_AS(zigzag_estimate(1, 1.1), std::invalid_argument);
}

TEST_CASE("zigzag transport: examples and bin property") {
    CHECK(zigzag_transport(1, 0.1, 0.3) == doctest::Approx(0.15).epsilon(1e-15));
    CHECK(zigzag_transport(1, 0.6, 0.3) == doctest::Approx(0.85).epsilon(1e-15));
    CounterRng rng(17);
    for (int trial = 0; trial < 2000; ++trial) {
        const int f = 1 + static_cast<int>(rng.next_u64() % 16);
        const double x1 = rng.next_unit();
        const double x2 = rng.next_unit();
        const double t = zigzag_transport(f, x1, x2);
        CHECK(std::fabs(x1 - t) <= 1.0 / (2.0 * f));
    }
}

TEST_CASE("transport identity: curve value at the transported point is x2") {
    CounterRng rng(23);
    double worst = 0.0;
    for (int trial = 0; trial < 10000; ++trial) {
        const int f = 1 + static_cast<int>(rng.next_u64() % 16);
        const double x1 = rng.next_unit();
        const double x2 = rng.next_unit();
        const double t = zigzag_transport(f, x1, x2);
        worst = std::max(worst, std::fabs(zigzag_estimate(f, t).x2 - x2));
    }
    CHECK(worst <= 1e-9);
}

TEST_CASE("ellipse curves: membership and the hole crossing") {
    const EllipseAnnulus shape = EllipseAnnulus::default_preset();
    const auto annulus = ToyDistribution::ellipse_annulus(shape);
    CHECK(support_contains(annulus, ellipse_avoid_estimate(shape, 0.0)));
    CHECK(!support_contains(annulus, ellipse_cross_estimate(shape, 0.0)));
    // cross reaches both bands
    CHECK(ellipse_cross_estimate(shape, -0.9).x2 > 0.0);
    CHECK(ellipse_cross_estimate(shape, 0.9).x2 < 0.0);
    CHECK_THROWS_AS(ellipse_avoid_estimate(shape, 1.5), std::invalid_argument);

    CounterRng rng(3);
    for (int i = 0; i < 2000; ++i) {
        const double y = shape.a_outer * rng.next_symmetric();
        CHECK(support_contains(annulus, ellipse_avoid_estimate(shape, y)));
    }
}

TEST_CASE("ellipse curves are numerically continuous") {
    const EllipseAnnulus shape = EllipseAnnulus::default_preset();
    const double dy = 1e-4;
    double worst_avoid = 0.0, worst_cross = 0.0;
    for (double y = -shape.a_outer; y + dy <= shape.a_outer; y += dy) {
        worst_avoid = std::max(worst_avoid, distance(ellipse_avoid_estimate(shape, y),
                                                     ellipse_avoid_estimate(shape, y + dy)));
        worst_cross = std::max(worst_cross, distance(ellipse_cross_estimate(shape, y),
                                                     ellipse_cross_estimate(shape, y + dy)));
    }
    CHECK(worst_avoid < 1e-2);
    CHECK(worst_cross < 1e-2);
}

TEST_CASE("estimate(): consistency is bit-exact for every kind") {
    const std::vector<Estimator> ests = {
        Estimator::sine(1.0), Estimator::sine(50.0), Estimator::zigzag(4),
        Estimator::disk_posterior(), Estimator::ellipse_avoid(EllipseAnnulus::default_preset()),
        Estimator::ellipse_cross(EllipseAnnulus::default_preset()),
        Estimator::neural(mlp_init({2, 8, 8, 1}, 99), true)};
    CounterRng rng(31);
    for (const Estimator& est : ests) {
        const EstimatorDomain dom = est.domain();
        const double lo = std::max(dom.lo, -1.0), hi = std::min(dom.hi, 1.0);
        for (int i = 0; i < 10000; ++i) {
            const double y = lo + (hi - lo) * rng.next_unit();
            REQUIRE(est.estimate(y, rng.next_u64()).x1 == y);
        }
    }
}

TEST_CASE("deterministic kinds ignore the seed; the posterior does not") {
    const Estimator sine = Estimator::sine(50.0);
    const Point2 a = sine.estimate(0.3, 1), b = sine.estimate(0.3, 2);
    CHECK(a.x2 == b.x2);

    const Estimator post = Estimator::disk_posterior();
    int distinct = 0;
    for (int i = 0; i < 100; ++i) {
        const Point2 u = post.estimate(0.0, derive_seed(1000, 2 * i));
        const Point2 v = post.estimate(0.0, derive_seed(1000, 2 * i + 1));
        if (u.x2 != v.x2) ++distinct;
    }
    CHECK(distinct == 100);
    CHECK(post.estimate(1.0, 123).x2 == 0.0);
}

TEST_CASE("estimate() rejects out-of-domain inputs") {
    CHECK_THROWS_AS(Estimator::sine(1.0).estimate(1.01, 0), std::invalid_argument);
    CHECK_THROWS_AS(Estimator::zigzag(2).estimate(-0.01, 0), std::invalid_argument);
    CHECK_THROWS_AS(Estimator::disk_posterior().estimate(-2.0, 0), std::invalid_argument);
}

TEST_CASE("neural estimator: z channel pinned to 0 when deterministic") {
    const MlpParams net = mlp_init({2, 8, 1}, 4);
    const Estimator det = Estimator::neural(net, false);
    CHECK(det.estimate(0.2, 1).x2 == det.estimate(0.2, 999).x2);
    const Estimator sto = Estimator::neural(net, true);
    CHECK(sto.estimate(0.2, 1).x2 != sto.estimate(0.2, 2).x2);
}
