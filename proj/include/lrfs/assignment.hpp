#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "lrfs/gaussian.hpp"

namespace lrfs {

struct Assignment {
    /// column_of_row[i] is the column assigned to row i.
    std::vector<int> column_of_row;
    double cost = 0.0;
};

/// Minimum-cost assignment of every row to a distinct column (rows ≤ columns)
/// by shortest augmenting paths with potentials, O(rows² · columns).
/// Entries may be negative or +inf; nullopt when no finite assignment exists.
inline std::optional<Assignment> solve_assignment(const Matrix& cost)
{
    const auto n = static_cast<int>(cost.rows());
    const auto m = static_cast<int>(cost.cols());
    if (n > m) {
        throw std::invalid_argument("solve_assignment: more rows than columns");
    }
    if (n == 0) {
        return Assignment{};
    }
    // 1-based arrays; column 0 is the virtual source.
    std::vector<double> u(n + 1, 0.0);
    std::vector<double> v(m + 1, 0.0);
    std::vector<int> row_of_col(m + 1, 0);
    std::vector<int> way(m + 1, 0);
    for (int i = 1; i <= n; ++i) {
        row_of_col[0] = i;
        int j0 = 0;
        std::vector<double> min_reduced(m + 1, kInf);
        std::vector<char> used(m + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = row_of_col[j0];
            double delta = kInf;
            int j1 = -1;
            for (int j = 1; j <= m; ++j) {
                if (used[j]) {
                    continue;
                }
                const double reduced = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (reduced < min_reduced[j]) {
                    min_reduced[j] = reduced;
                    way[j] = j0;
                }
                if (min_reduced[j] < delta) {
                    delta = min_reduced[j];
                    j1 = j;
                }
            }
            if (j1 < 0 || !std::isfinite(delta)) {
                return std::nullopt;
            }
            for (int j = 0; j <= m; ++j) {
                if (used[j]) {
                    u[row_of_col[j]] += delta;
                    v[j] -= delta;
                } else {
                    min_reduced[j] -= delta;
                }
            }
            j0 = j1;
        } while (row_of_col[j0] != 0);
        do {
            const int j1 = way[j0];
            row_of_col[j0] = row_of_col[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    Assignment out;
    out.column_of_row.assign(n, -1);
    for (int j = 1; j <= m; ++j) {
        if (row_of_col[j] != 0) {
            out.column_of_row[row_of_col[j] - 1] = j - 1;
        }
    }
    for (int i = 0; i < n; ++i) {
        out.cost += cost(i, out.column_of_row[i]);
    }
    if (!std::isfinite(out.cost)) {
        return std::nullopt;
    }
    return out;
}

}  // namespace lrfs
