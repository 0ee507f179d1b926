#include "ctmdp/lp.h"

#include <stdexcept>

namespace ctmdp {

HullResult convex_hull_membership(const std::vector<RationalVector>& candidates, const RationalVector& target) {
    if (candidates.empty()) throw std::invalid_argument("convex hull of no candidates");
    const std::size_t dim = target.size();
    for (const auto& c : candidates) {
        if (c.size() != dim) throw std::invalid_argument("candidate dimension does not match target");
    }

    // Rows: one per coordinate plus the sum-to-one row. Columns: candidate weights,
    // then one artificial per row, then the right-hand side.
    const std::size_t rows = dim + 1;
    const std::size_t n = candidates.size();
    const std::size_t cols = n + rows;
    std::vector<RationalVector> tab(rows, RationalVector(cols + 1, Rational(0)));
    std::vector<int> sign(rows, 1);
    for (std::size_t i = 0; i < rows; ++i) {
        Rational rhs = i < dim ? target[i] : Rational(1);
        if (rhs < 0) sign[i] = -1;
        for (std::size_t j = 0; j < n; ++j) tab[i][j] = sign[i] * (i < dim ? candidates[j][i] : Rational(1));
        tab[i][n + i] = 1;
        tab[i][cols] = sign[i] * rhs;
    }
    std::vector<std::size_t> basis(rows);
    for (std::size_t i = 0; i < rows; ++i) basis[i] = n + i;

    // Reduced costs for minimising the sum of artificials; last entry is -objective.
    RationalVector cost(cols + 1, Rational(0));
    for (std::size_t j = 0; j < cols + 1; ++j) {
        if (j >= n && j < cols) continue;
        for (std::size_t i = 0; i < rows; ++i) cost[j] -= tab[i][j];
    }

    while (true) {
        std::size_t enter = cols;
        for (std::size_t j = 0; j < cols; ++j) {
            if (cost[j] < 0) {
                enter = j;
                break;
            }
        }
        if (enter == cols) break;

        std::size_t leave = rows;
        Rational best_ratio;
        for (std::size_t i = 0; i < rows; ++i) {
            if (tab[i][enter] <= 0) continue;
            Rational ratio = tab[i][cols] / tab[i][enter];
            if (leave == rows || ratio < best_ratio || (ratio == best_ratio && basis[i] < basis[leave])) {
                leave = i;
                best_ratio = ratio;
            }
        }
        // Phase one is bounded below by zero, so an entering column always has a pivot.
        if (leave == rows) throw std::logic_error("unbounded phase-one simplex");

        const Rational pivot = tab[leave][enter];
        for (auto& v : tab[leave]) v /= pivot;
        for (std::size_t i = 0; i < rows; ++i) {
            if (i == leave || tab[i][enter] == 0) continue;
            const Rational factor = tab[i][enter];
            for (std::size_t j = 0; j <= cols; ++j) tab[i][j] -= factor * tab[leave][j];
        }
        if (cost[enter] != 0) {
            const Rational factor = cost[enter];
            for (std::size_t j = 0; j <= cols; ++j) cost[j] -= factor * tab[leave][j];
        }
        basis[leave] = enter;
    }

    HullResult result;
    if (cost[cols] == 0) {
        result.feasible = true;
        result.weights.assign(n, Rational(0));
        for (std::size_t i = 0; i < rows; ++i) {
            if (basis[i] < n) result.weights[basis[i]] = tab[i][cols];
        }
        return result;
    }

    // Phase-one duals: y_i = 1 - reduced cost of artificial i (for the sign-normalised rows).
    // Then y.A_j <= 0 for every candidate column and y.b > 0.
    RationalVector y(rows);
    for (std::size_t i = 0; i < rows; ++i) y[i] = sign[i] * (1 - cost[n + i]);
    result.certificate.assign(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(dim));
    result.bound = -y[dim];
    return result;
}

}  // namespace ctmdp
