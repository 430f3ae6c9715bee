#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "lab/types.hpp"

namespace lab {

// Standalone scatter plot: fixed 640x640 viewport, equal-aspect axes covering
// the joint bounding box plus a 5% margin, one <circle> per point, and a
// legend naming each set. At most 8 sets; byte-identical output for
// identical input.
void emit_scatter_svg(const std::vector<std::pair<SampleSet, std::string>>& sets,
                      const std::filesystem::path& path);

// Default palette used by the scenario reports.
const std::vector<std::string>& scatter_palette();

}  // namespace lab
