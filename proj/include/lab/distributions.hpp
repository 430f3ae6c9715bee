#pragma once

#include <cstdint>
#include <vector>

#include "lab/types.hpp"

namespace lab {

// Annulus between two concentric axis-aligned ellipses; the inner ellipse is
// a hole in the support.
struct EllipseAnnulus {
    double a_outer = 1.0;
    double b_outer = 0.5;
    double a_inner = 0.6;
    double b_inner = 0.25;

    void validate() const;

    // Stand-in geometry: the source material gives no numbers for this shape,
    // so reports that use it carry a note saying the preset is a placeholder.
    static EllipseAnnulus default_preset() { return {}; }
};

class ToyDistribution {
public:
    enum class Kind { UnitDisk, UnitSquare, EllipseAnnulus };

    static ToyDistribution unit_disk() { return ToyDistribution(Kind::UnitDisk, {}); }
    static ToyDistribution unit_square() { return ToyDistribution(Kind::UnitSquare, {}); }
    static ToyDistribution ellipse_annulus(EllipseAnnulus shape) {
        shape.validate();
        return ToyDistribution(Kind::EllipseAnnulus, shape);
    }

    Kind kind() const { return kind_; }
    const EllipseAnnulus& ellipse() const { return ellipse_; }
    const char* name() const;

private:
    ToyDistribution(Kind kind, EllipseAnnulus e) : kind_(kind), ellipse_(e) {}
    Kind kind_;
    EllipseAnnulus ellipse_;
};

// Uniform samples over the support. Deterministic in (dist, n, seed).
// Disk: inverse-CDF radius r = sqrt(u) and uniform angle. Square: two
// uniforms. EllipseAnnulus: rejection from the outer ellipse's bounding box,
// consuming two variates per attempt in order, which keeps the stream
// seed-stable.
SampleSet sample(const ToyDistribution& dist, std::size_t n, std::uint64_t seed);

// Membership in the closed support.
bool support_contains(const ToyDistribution& dist, Point2 p);

// Exact conditional sampler for the unit disk given the observed coordinate:
// x1 = y exactly, x2 uniform on the chord [-sqrt(1-y^2), sqrt(1-y^2)].
SampleSet posterior_sample_disk(double y, std::size_t n, std::uint64_t seed);
Point2 posterior_draw_disk(double y, std::uint64_t seed);

// Closed-form density of the disk's observed coordinate: 2*sqrt(1-x^2)/pi.
double disk_marginal_pdf(double x1);

// Draws from the disk's observed-coordinate marginal.
std::vector<double> sample_disk_marginal(std::size_t n, std::uint64_t seed);

}  // namespace lab
