#include "lab/distributions.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "lab/rng.hpp"

namespace lab {

void EllipseAnnulus::validate() const {
    if (!(a_outer > 0 && b_outer > 0 && a_inner > 0 && b_inner > 0))
        throw std::invalid_argument("EllipseAnnulus: semi-axes must be positive");
    if (!(a_inner < a_outer && b_inner < b_outer))
        throw std::invalid_argument("EllipseAnnulus: inner ellipse must lie strictly inside the outer");
}

const char* ToyDistribution::name() const {
    switch (kind_) {
        case Kind::UnitDisk: return "unit-disk";
        case Kind::UnitSquare: return "unit-square";
        case Kind::EllipseAnnulus: return "ellipse-annulus";
    }
    return "?";
}

namespace {

inline double ellipse_level(double x, double y, double a, double b) {
    const double u = x / a;
    const double v = y / b;
    return u * u + v * v;
}

Point2 draw_disk(CounterRng& rng) {
    const double r = std::sqrt(rng.next_unit());
    const double theta = 2.0 * std::numbers::pi * rng.next_unit();
    return {r * std::cos(theta), r * std::sin(theta)};
}

Point2 draw_annulus(const EllipseAnnulus& e, CounterRng& rng) {
    for (;;) {
        const double x = e.a_outer * rng.next_symmetric();
        const double y = e.b_outer * rng.next_symmetric();
        if (ellipse_level(x, y, e.a_outer, e.b_outer) <= 1.0 &&
            ellipse_level(x, y, e.a_inner, e.b_inner) >= 1.0)
            return {x, y};
    }
}

}  // namespace

SampleSet sample(const ToyDistribution& dist, std::size_t n, std::uint64_t seed) {
    if (n == 0)
        throw std::invalid_argument("sample: n must be positive");
    CounterRng rng(seed);
    std::vector<Point2> pts;
    pts.reserve(n);
    switch (dist.kind()) {
        case ToyDistribution::Kind::UnitDisk:
            for (std::size_t i = 0; i < n; ++i) pts.push_back(draw_disk(rng));
            break;
        case ToyDistribution::Kind::UnitSquare:
            for (std::size_t i = 0; i < n; ++i) {
                const double x = rng.next_unit();
                const double y = rng.next_unit();
                pts.push_back({x, y});
            }
            break;
        case ToyDistribution::Kind::EllipseAnnulus:
            for (std::size_t i = 0; i < n; ++i) pts.push_back(draw_annulus(dist.ellipse(), rng));
            break;
    }
    return SampleSet(std::move(pts), dist.name());
}

bool support_contains(const ToyDistribution& dist, Point2 p) {
    switch (dist.kind()) {
        case ToyDistribution::Kind::UnitDisk:
            return p.x1 * p.x1 + p.x2 * p.x2 <= 1.0;
        case ToyDistribution::Kind::UnitSquare:
            return p.x1 >= 0.0 && p.x1 <= 1.0 && p.x2 >= 0.0 && p.x2 <= 1.0;
        case ToyDistribution::Kind::EllipseAnnulus: {
            const EllipseAnnulus& e = dist.ellipse();
            return ellipse_level(p.x1, p.x2, e.a_outer, e.b_outer) <= 1.0 &&
                   ellipse_level(p.x1, p.x2, e.a_inner, e.b_inner) >= 1.0;
        }
    }
    return false;
}

Point2 posterior_draw_disk(double y, std::uint64_t seed) {
    if (!(std::fabs(y) <= 1.0))
        throw std::invalid_argument("posterior_draw_disk: |y| must be <= 1");
    const double half = std::sqrt(std::max(0.0, 1.0 - y * y));
    CounterRng rng(seed);
    return {y, half * rng.next_symmetric()};
}

SampleSet posterior_sample_disk(double y, std::size_t n, std::uint64_t seed) {
    if (n == 0)
        throw std::invalid_argument("posterior_sample_disk: n must be positive");
    if (!(std::fabs(y) <= 1.0))
        throw std::invalid_argument("posterior_sample_disk: |y| must be <= 1");
    const double half = std::sqrt(std::max(0.0, 1.0 - y * y));
    CounterRng rng(seed);
    std::vector<Point2> pts;
    pts.reserve(n);
    for (std::size_t i = 0; i < n; ++i) pts.push_back({y, half * rng.next_symmetric()});
    return SampleSet(std::move(pts), "disk-posterior");
}

double disk_marginal_pdf(double x1) {
    if (std::fabs(x1) > 1.0) return 0.0;
    return 2.0 * std::sqrt(1.0 - x1 * x1) / std::numbers::pi;
}

std::vector<double> sample_disk_marginal(std::size_t n, std::uint64_t seed) {
    CounterRng rng(seed);
    std::vector<double> ys;
    ys.reserve(n);
    for (std::size_t i = 0; i < n; ++i) ys.push_back(draw_disk(rng).x1);
    return ys;
}

}  // namespace lab
