#pragma once

#include <vector>

namespace lab {

// Exact minimum-cost perfect assignment on an n x n cost matrix (row-major),
// O(n^3) shortest-augmenting-path scheme with dual potentials. Returns the
// optimal total cost; if row_to_col is non-null it receives the matching.
double min_cost_assignment(const std::vector<double>& cost, int n,
                           std::vector<int>* row_to_col = nullptr);

}  // namespace lab
