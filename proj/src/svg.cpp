#include "lab/svg.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace lab {

const std::vector<std::string>& scatter_palette() {
    static const std::vector<std::string> palette = {"#4878cf", "#d65f5f", "#6acc65", "#956cb4",
                                                     "#c4ad66", "#77bedb", "#8c613c", "#dc7ec0"};
    return palette;
}

namespace {

constexpr double kViewport = 640.0;
constexpr double kMargin = 0.05;

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", x);
    return buf;
}

std::string escape_xml(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

void emit_scatter_svg(const std::vector<std::pair<SampleSet, std::string>>& sets,
                      const std::filesystem::path& path) {
    if (sets.empty())
        throw std::invalid_argument("emit_scatter_svg: no sample sets");
    if (sets.size() > 8)
        throw std::invalid_argument("emit_scatter_svg: at most 8 sample sets");

    double xmin = sets[0].first.points()[0].x1, xmax = xmin;
    double ymin = sets[0].first.points()[0].x2, ymax = ymin;
    for (const auto& [set, color] : sets)
        for (const Point2& p : set.points()) {
            xmin = std::min(xmin, p.x1);
            xmax = std::max(xmax, p.x1);
            ymin = std::min(ymin, p.x2);
            ymax = std::max(ymax, p.x2);
        }
    double w = xmax - xmin, h = ymax - ymin;
    if (w == 0.0) w = 1.0;
    if (h == 0.0) h = 1.0;
    const double cx = 0.5 * (xmin + xmax), cy = 0.5 * (ymin + ymax);
    const double span = std::max(w, h) * (1.0 + 2.0 * kMargin);
    const double scale = kViewport / span;

    auto sx = [&](double x) { return kViewport / 2.0 + (x - cx) * scale; };
    auto sy = [&](double y) { return kViewport / 2.0 - (y - cy) * scale; };

    std::ofstream os(path);
    if (!os)
        throw std::runtime_error("emit_scatter_svg: cannot open " + path.string());
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"640\" "
          "viewBox=\"0 0 640 640\">\n";
    os << "<rect width=\"640\" height=\"640\" fill=\"white\"/>\n";
    for (const auto& [set, color] : sets) {
        os << "<g fill=\"" << color << "\" fill-opacity=\"0.7\">\n";
        for (const Point2& p : set.points())
            os << "<circle cx=\"" << fmt(sx(p.x1)) << "\" cy=\"" << fmt(sy(p.x2))
               << "\" r=\"2\"/>\n";
        os << "</g>\n";
    }
    for (std::size_t i = 0; i < sets.size(); ++i) {
        const double ly = 16.0 + 18.0 * static_cast<double>(i);
        os << "<rect x=\"10\" y=\"" << fmt(ly - 9.0) << "\" width=\"12\" height=\"12\" fill=\""
           << sets[i].second << "\"/>\n";
        os << "<text x=\"28\" y=\"" << fmt(ly + 2.0)
           << "\" font-family=\"sans-serif\" font-size=\"13\">" << escape_xml(sets[i].first.label())
           << "</text>\n";
    }
    os << "</svg>\n";
    if (!os)
        throw std::runtime_error("emit_scatter_svg: write failed for " + path.string());
}

}  // namespace lab
