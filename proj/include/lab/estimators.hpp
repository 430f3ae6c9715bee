#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <vector>

#include "lab/distributions.hpp"
#include "lab/mlp.hpp"
#include "lab/types.hpp"

namespace lab {

// Closed-form consistent estimators. Every estimator copies its input into
// the first output coordinate exactly, so consistency never depends on
// numerics.

// (y, sqrt(1-y^2)*sin(alpha*y)); |y| <= 1. Large alpha sweeps the output
// across the disk, small alpha stays near a smooth curve.
Point2 sine_estimate(double alpha, double y);

// (y, triangle wave of frequency f); y in [0, 1]. The wave is
// acos(cos(2*pi*f*y))/pi, a curve whose graph fills the unit square as f
// grows.
Point2 zigzag_estimate(int frequency, double y);

// Horizontal transport of a unit-square point onto the zigzag curve: the
// result stays in x1's width-1/(2f) bin and the curve takes value x2 there
// exactly. Bin index floor(2f*x1), clamped at the right edge.
double zigzag_transport(int frequency, double x1, double x2);

// Continuous consistent curves for the ellipse annulus. The "avoid" curve
// tracks the vertical midline of the upper band and never enters the hole.
// The "cross" curve follows the upper band, descends linearly through the
// hole on [-a_inner/2, a_inner/2], then follows the lower band.
Point2 ellipse_avoid_estimate(const EllipseAnnulus& shape, double y);
Point2 ellipse_cross_estimate(const EllipseAnnulus& shape, double y);

struct EstimatorDomain {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    bool contains(double y) const { return y >= lo && y <= hi; }
};

// A single interface over the analytic families and trained networks, used by
// the metrics and attack code.
class Estimator {
public:
    enum class Kind { SineDeterministic, Zigzag, DiskPosterior, EllipseAvoid, EllipseCross, Neural };

    static Estimator sine(double alpha);
    static Estimator zigzag(int frequency);
    static Estimator disk_posterior();
    static Estimator ellipse_avoid(EllipseAnnulus shape);
    static Estimator ellipse_cross(EllipseAnnulus shape);
    // Generator network over (y, z); z is a uniform [0,1) seed channel for
    // stochastic estimators and constant 0 otherwise.
    static Estimator neural(MlpParams generator, bool stochastic, int seed_dim = 1);

    Kind kind() const { return kind_; }
    bool is_stochastic() const;
    EstimatorDomain domain() const { return domain_; }
    const char* name() const;

    // Deterministic kinds ignore the seed; stochastic kinds are a pure
    // function of (y, seed). Throws std::invalid_argument outside the domain.
    Point2 estimate(double y, std::uint64_t seed) const;

    // d x2 / d y at fixed seed. Exact for Neural (reverse-mode input
    // gradient); callers fall back to finite differences for other kinds.
    bool has_exact_gradient() const { return kind_ == Kind::Neural; }
    double output_slope(double y, std::uint64_t seed) const;

    // Batched Neural evaluation over a seed list (one forward/backward for
    // all seeds). x2s/slopes are resized to seeds.size().
    void neural_outputs(double y, const std::vector<std::uint64_t>& seeds,
                        std::vector<double>& x2s, std::vector<double>* slopes = nullptr) const;

    const MlpParams& generator() const;

private:
    Estimator(Kind kind, EstimatorDomain dom) : kind_(kind), domain_(dom) {}
    void require_in_domain(double y) const;
    double seed_channel(std::uint64_t seed) const;

    Kind kind_;
    EstimatorDomain domain_;
    double alpha_ = 0.0;
    int frequency_ = 1;
    EllipseAnnulus shape_;
    std::shared_ptr<const MlpParams> net_;
    bool stochastic_ = false;
    int seed_dim_ = 1;
};

}  // namespace lab
