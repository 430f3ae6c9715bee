#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "lab/gan.hpp"
#include "lab/types.hpp"

namespace lab {

// CSV with header `x1,x2`, decimal point, 17 significant digits (round-trip
// exact for doubles).
void write_sampleset_csv(const SampleSet& set, const std::filesystem::path& path);
SampleSet read_sampleset_csv(const std::filesystem::path& path, const std::string& label);

// CSV with header `step,gen_loss,critic_loss,r1,robust_loss`.
void write_history_csv(const std::vector<TrainHistoryRow>& history,
                       const std::filesystem::path& path);

}  // namespace lab
