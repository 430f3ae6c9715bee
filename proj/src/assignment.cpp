#include "lab/assignment.hpp"

#include <limits>
#include <stdexcept>

namespace lab {

double min_cost_assignment(const std::vector<double>& cost, int n, std::vector<int>* row_to_col) {
    if (n <= 0 || cost.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(n))
        throw std::invalid_argument("min_cost_assignment: cost matrix must be n x n");

    const double inf = std::numeric_limits<double>::infinity();
    // 1-based duals/links; p[j] is the row matched to column j.
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    std::vector<char> used(n + 1);

    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::fill(minv.begin(), minv.end(), inf);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[j0] = 1;
            const int i0 = p[j0];
            const double* row = cost.data() + static_cast<std::size_t>(i0 - 1) * n;
            double delta = inf;
            int j1 = 0;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = row[j - 1] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    if (row_to_col) {
        row_to_col->assign(n, -1);
        for (int j = 1; j <= n; ++j)
            if (p[j] != 0) (*row_to_col)[p[j] - 1] = j - 1;
    }
    double total = 0.0;
    for (int j = 1; j <= n; ++j) total += cost[static_cast<std::size_t>(p[j] - 1) * n + (j - 1)];
    return total;
}

}  // namespace lab
