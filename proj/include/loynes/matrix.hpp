#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "loynes/errors.hpp"

namespace loynes {

// Small dense matrices only; every chain in scope has a handful of states.
using Mat = std::vector<std::vector<double>>;

inline void require_square(const Mat &m, const char *what) {
    if (m.empty()) throw parameter_error(std::string(what) + ": matrix is empty");
    for (const auto &row : m)
        if (row.size() != m.size())
            throw parameter_error(std::string(what) + ": matrix is not square");
}

// Strong connectivity of the support digraph (edge i->j iff m[i][j] > 0),
// checked by reachability from vertex 0 in the graph and its reverse.
inline bool strongly_connected(const Mat &m) {
    const std::size_t n = m.size();
    auto reaches_all = [&](bool transpose) {
        std::vector<bool> seen(n, false);
        std::vector<std::size_t> stack{0};
        seen[0] = true;
        std::size_t found = 1;
        while (!stack.empty()) {
            const std::size_t i = stack.back();
            stack.pop_back();
            for (std::size_t j = 0; j < n; ++j) {
                const double w = transpose ? m[j][i] : m[i][j];
                if (w > 0.0 && !seen[j]) {
                    seen[j] = true;
                    ++found;
                    stack.push_back(j);
                }
            }
        }
        return found == n;
    };
    return reaches_all(false) && reaches_all(true);
}

inline void require_stochastic(const Mat &m, const char *what, double tol = 1e-12) {
    require_square(m, what);
    for (std::size_t i = 0; i < m.size(); ++i) {
        double sum = 0.0;
        for (double v : m[i]) {
            if (!(v >= 0.0) || v > 1.0 || !std::isfinite(v))
                throw parameter_error(std::string(what) + ": entries must lie in [0,1]");
            sum += v;
        }
        if (std::abs(sum - 1.0) > tol)
            throw parameter_error(std::string(what) + ": row " + std::to_string(i) +
                                  " sums to " + std::to_string(sum) + ", expected 1");
    }
}

// Stationary distribution of an irreducible row-stochastic matrix, by direct
// solve of x^T P = x^T with the normalization sum(x) = 1 substituted for the
// first (redundant) balance equation. For irreducible P the system is
// nonsingular, so this is exact regardless of how slowly the chain mixes.
inline std::vector<double> stationary_distribution(const Mat &p) {
    require_square(p, "stationary_distribution");
    const std::size_t n = p.size();
    Mat a(n, std::vector<double>(n + 1, 0.0)); // augmented [A | b]
    for (std::size_t j = 0; j < n; ++j) a[0][j] = 1.0;
    a[0][n] = 1.0;
    for (std::size_t i = 1; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) a[i][j] = p[j][i] - (i == j ? 1.0 : 0.0);

    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        if (a[pivot][col] == 0.0)
            throw parameter_error("stationary_distribution: singular system (reducible matrix?)");
        std::swap(a[col], a[pivot]);
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col || a[r][col] == 0.0) continue;
            const double factor = a[r][col] / a[col][col];
            for (std::size_t j = col; j <= n; ++j) a[r][j] -= factor * a[col][j];
        }
    }
    std::vector<double> x(n, 0.0);
    double mass = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = std::max(0.0, a[i][n] / a[i][i]);
        mass += x[i];
    }
    for (auto &v : x) v /= mass;
    return x;
}

} // namespace loynes
