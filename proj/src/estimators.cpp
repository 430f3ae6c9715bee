#include "lab/estimators.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "lab/rng.hpp"

namespace lab {

Point2 sine_estimate(double alpha, double y) {
    if (!(std::fabs(y) <= 1.0))
        throw std::invalid_argument("sine_estimate: |y| must be <= 1");
    const double amp = std::sqrt(std::max(0.0, 1.0 - y * y));
    return {y, amp * std::sin(alpha * y)};
}

Point2 zigzag_estimate(int frequency, double y) {
    if (frequency < 1)
        throw std::invalid_argument("zigzag_estimate: frequency must be >= 1");
    if (!(y >= 0.0 && y <= 1.0))
        throw std::invalid_argument("zigzag_estimate: y must be in [0, 1]");
    const double g = std::acos(std::cos(2.0 * std::numbers::pi * frequency * y)) / std::numbers::pi;
    return {y, g};
}

double zigzag_transport(int frequency, double x1, double x2) {
    if (frequency < 1)
        throw std::invalid_argument("zigzag_transport: frequency must be >= 1");
    if (!(x1 >= 0.0 && x1 <= 1.0) || !(x2 >= 0.0 && x2 <= 1.0))
        throw std::invalid_argument("zigzag_transport: inputs must be in the unit square");
    const int bins = 2 * frequency;
    int bin = static_cast<int>(std::floor(x1 * bins));
    if (bin >= bins) bin = bins - 1;  // x1 == 1 boundary
    const double frac = (bin % 2 == 0) ? x2 : 1.0 - x2;
    return (static_cast<double>(bin) + frac) / static_cast<double>(bins);
}

namespace {

// Height of the upper-band midline at horizontal position x: halfway between
// the hole's upper boundary (0 outside the hole) and the outer ellipse.
double upper_band_mid(const EllipseAnnulus& e, double x) {
    const double uo = x / e.a_outer;
    const double yo = e.b_outer * std::sqrt(std::max(0.0, 1.0 - uo * uo));
    double yi = 0.0;
    if (std::fabs(x) < e.a_inner) {
        const double ui = x / e.a_inner;
        yi = e.b_inner * std::sqrt(std::max(0.0, 1.0 - ui * ui));
    }
    return 0.5 * (yi + yo);
}

}  // namespace

Point2 ellipse_avoid_estimate(const EllipseAnnulus& shape, double y) {
    if (!(std::fabs(y) <= shape.a_outer))
        throw std::invalid_argument("ellipse_avoid_estimate: |y| must be <= a_outer");
    return {y, upper_band_mid(shape, y)};
}

Point2 ellipse_cross_estimate(const EllipseAnnulus& shape, double y) {
    if (!(std::fabs(y) <= shape.a_outer))
        throw std::invalid_argument("ellipse_cross_estimate: |y| must be <= a_outer");
    const double half = 0.5 * shape.a_inner;
    if (y <= -half) return {y, upper_band_mid(shape, y)};
    if (y >= half) return {y, -upper_band_mid(shape, y)};
    const double h = upper_band_mid(shape, half);  // = value at -half by symmetry
    return {y, -h * y / half};
}

Estimator Estimator::sine(double alpha) {
    Estimator e(Kind::SineDeterministic, {-1.0, 1.0});
    e.alpha_ = alpha;
    return e;
}

Estimator Estimator::zigzag(int frequency) {
    if (frequency < 1)
        throw std::invalid_argument("Estimator::zigzag: frequency must be >= 1");
    Estimator e(Kind::Zigzag, {0.0, 1.0});
    e.frequency_ = frequency;
    return e;
}

Estimator Estimator::disk_posterior() { return Estimator(Kind::DiskPosterior, {-1.0, 1.0}); }

Estimator Estimator::ellipse_avoid(EllipseAnnulus shape) {
    shape.validate();
    Estimator e(Kind::EllipseAvoid, {-shape.a_outer, shape.a_outer});
    e.shape_ = shape;
    return e;
}

Estimator Estimator::ellipse_cross(EllipseAnnulus shape) {
    shape.validate();
    Estimator e(Kind::EllipseCross, {-shape.a_outer, shape.a_outer});
    e.shape_ = shape;
    return e;
}

Estimator Estimator::neural(MlpParams generator, bool stochastic, int seed_dim) {
    generator.validate();
    if (generator.input_size() != 2 || generator.output_size() != 1)
        throw std::invalid_argument("Estimator::neural: generator must map (y, z) to a scalar");
    if (seed_dim != 1)
        throw std::invalid_argument("Estimator::neural: only a single seed channel is supported");
    Estimator e(Kind::Neural, {});  // networks accept any real input
    e.net_ = std::make_shared<const MlpParams>(std::move(generator));
    e.stochastic_ = stochastic;
    e.seed_dim_ = seed_dim;
    return e;
}

bool Estimator::is_stochastic() const {
    return kind_ == Kind::DiskPosterior || (kind_ == Kind::Neural && stochastic_);
}

const char* Estimator::name() const {
    switch (kind_) {
        case Kind::SineDeterministic: return "sine";
        case Kind::Zigzag: return "zigzag";
        case Kind::DiskPosterior: return "disk-posterior";
        case Kind::EllipseAvoid: return "ellipse-avoid";
        case Kind::EllipseCross: return "ellipse-cross";
        case Kind::Neural: return "neural";
    }
    return "?";
}

void Estimator::require_in_domain(double y) const {
    if (!std::isfinite(y) || !domain_.contains(y))
        throw std::invalid_argument("Estimator: input outside domain");
}

double Estimator::seed_channel(std::uint64_t seed) const {
    if (!stochastic_) return 0.0;
    return CounterRng(seed).next_unit();
}

Point2 Estimator::estimate(double y, std::uint64_t seed) const {
    require_in_domain(y);
    switch (kind_) {
        case Kind::SineDeterministic: return sine_estimate(alpha_, y);
        case Kind::Zigzag: return zigzag_estimate(frequency_, y);
        case Kind::DiskPosterior: return posterior_draw_disk(y, seed);
        case Kind::EllipseAvoid: return ellipse_avoid_estimate(shape_, y);
        case Kind::EllipseCross: return ellipse_cross_estimate(shape_, y);
        case Kind::Neural: {
            Eigen::Matrix<double, 2, 1> in(y, seed_channel(seed));
            return {y, forward(*net_, Eigen::MatrixXd(in))(0, 0)};
        }
    }
    throw std::logic_error("Estimator: unknown kind");
}

double Estimator::output_slope(double y, std::uint64_t seed) const {
    if (kind_ != Kind::Neural)
        throw std::logic_error("Estimator::output_slope: exact gradients only for Neural");
    Eigen::Matrix<double, 2, 1> in(y, seed_channel(seed));
    ForwardTrace trace;
    forward(*net_, Eigen::MatrixXd(in), &trace);
    Eigen::MatrixXd input_grad;
    backward(*net_, trace, Eigen::MatrixXd::Ones(1, 1), &input_grad);
    return input_grad(0, 0);
}

void Estimator::neural_outputs(double y, const std::vector<std::uint64_t>& seeds,
                               std::vector<double>& x2s, std::vector<double>* slopes) const {
    if (kind_ != Kind::Neural)
        throw std::logic_error("Estimator::neural_outputs: Neural estimators only");
    const Eigen::Index n = static_cast<Eigen::Index>(seeds.size());
    Eigen::MatrixXd in(2, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        in(0, i) = y;
        in(1, i) = seed_channel(seeds[static_cast<std::size_t>(i)]);
    }
    ForwardTrace trace;
    const Eigen::MatrixXd out = forward(*net_, in, slopes ? &trace : nullptr);
    x2s.resize(seeds.size());
    for (Eigen::Index i = 0; i < n; ++i) x2s[static_cast<std::size_t>(i)] = out(0, i);
    if (slopes) {
        Eigen::MatrixXd input_grad;
        backward(*net_, trace, Eigen::MatrixXd::Ones(1, n), &input_grad);
        slopes->resize(seeds.size());
        for (Eigen::Index i = 0; i < n; ++i)
            (*slopes)[static_cast<std::size_t>(i)] = input_grad(0, i);
    }
}

const MlpParams& Estimator::generator() const {
    if (!net_)
        throw std::logic_error("Estimator::generator: not a neural estimator");
    return *net_;
}

}  // namespace lab
