#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace lab {

// A 2D sample: x1 is the observed coordinate (the degraded measurement y is
// always a copy of it), x2 is the latent coordinate an estimator must fill in.
struct Point2 {
    double x1 = 0.0;
    double x2 = 0.0;
};

inline double squared_distance(Point2 a, Point2 b) {
    const double dx = a.x1 - b.x1;
    const double dy = a.x2 - b.x2;
    return dx * dx + dy * dy;
}

inline double distance(Point2 a, Point2 b) { return std::sqrt(squared_distance(a, b)); }

// Ordered, immutable collection of points; size is fixed at construction.
class SampleSet {
public:
    SampleSet(std::vector<Point2> points, std::string label)
        : points_(std::move(points)), label_(std::move(label)) {
        if (points_.empty())
            throw std::invalid_argument("SampleSet: empty point list");
        for (const Point2& p : points_)
            if (!std::isfinite(p.x1) || !std::isfinite(p.x2))
                throw std::invalid_argument("SampleSet: non-finite coordinate");
    }

    const std::vector<Point2>& points() const { return points_; }
    std::size_t size() const { return points_.size(); }
    const std::string& label() const { return label_; }

private:
    std::vector<Point2> points_;
    std::string label_;
};

}  // namespace lab
