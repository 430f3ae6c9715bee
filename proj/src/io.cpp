#include "lab/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace lab {

namespace {

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

}  // namespace

void write_sampleset_csv(const SampleSet& set, const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os)
        throw std::runtime_error("write_sampleset_csv: cannot open " + path.string());
    os << "x1,x2\n";
    for (const Point2& p : set.points()) os << fmt17(p.x1) << ',' << fmt17(p.x2) << '\n';
    if (!os)
        throw std::runtime_error("write_sampleset_csv: write failed for " + path.string());
}

SampleSet read_sampleset_csv(const std::filesystem::path& path, const std::string& label) {
    std::ifstream is(path);
    if (!is)
        throw std::runtime_error("read_sampleset_csv: cannot open " + path.string());
    std::string line;
    if (!std::getline(is, line) || line != "x1,x2")
        throw std::runtime_error("read_sampleset_csv: missing x1,x2 header in " + path.string());
    std::vector<Point2> pts;
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        const std::size_t comma = line.find(',');
        if (comma == std::string::npos)
            throw std::runtime_error("read_sampleset_csv: bad row at line " +
                                     std::to_string(lineno));
        pts.push_back({std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1))});
    }
    return SampleSet(std::move(pts), label);
}

void write_history_csv(const std::vector<TrainHistoryRow>& history,
                       const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os)
        throw std::runtime_error("write_history_csv: cannot open " + path.string());
    os << "step,gen_loss,critic_loss,r1,robust_loss\n";
    for (const TrainHistoryRow& r : history)
        os << r.step << ',' << fmt17(r.gen_loss) << ',' << fmt17(r.critic_loss) << ','
           << fmt17(r.r1) << ',' << fmt17(r.robust_loss) << '\n';
    if (!os)
        throw std::runtime_error("write_history_csv: write failed for " + path.string());
}

}  // namespace lab
