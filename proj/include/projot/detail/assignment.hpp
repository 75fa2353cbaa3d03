#pragma once

// Shortest-augmenting-path Hungarian method for square assignment problems,
// O(n^3). Potentials satisfy u[i] + v[j] <= cost(i, j), with equality on the
// assignment.

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "../error.hpp"

namespace projot::detail {

struct AssignmentResult {
    std::vector<std::size_t> column_of_row;
    std::vector<double> u;
    std::vector<double> v;
};

inline AssignmentResult solve_assignment(std::size_t n, std::span<const double> cost)
{
    if (cost.size() != n * n)
        throw Error(ErrorCode::DimensionMismatch, "assignment needs a square cost matrix");
    constexpr double inf = std::numeric_limits<double>::infinity();
    // 1-based internals with a virtual column 0.
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
    std::vector<std::size_t> row_of_col(n + 1, 0), way(n + 1, 0);
    std::vector<char> used(n + 1);
    for (std::size_t i = 1; i <= n; ++i) {
        row_of_col[0] = i;
        std::size_t j0 = 0;
        std::fill(minv.begin(), minv.end(), inf);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = row_of_col[j0];
            const double* row = cost.data() + (i0 - 1) * n;
            const double ui0 = u[i0];
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j])
                    continue;
                const double cur = row[j - 1] - ui0 - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            if (j1 == 0)
                throw Error(ErrorCode::SolverFailure, "assignment augmentation failed");
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[row_of_col[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (row_of_col[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            row_of_col[j0] = row_of_col[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    AssignmentResult r;
    r.column_of_row.assign(n, 0);
    for (std::size_t j = 1; j <= n; ++j)
        r.column_of_row[row_of_col[j] - 1] = j - 1;
    r.u.assign(u.begin() + 1, u.end());
    r.v.assign(v.begin() + 1, v.end());
    return r;
}

} // namespace projot::detail
