#pragma once

// Gauss-Legendre quadrature on [0, 1]. Nodes are the Legendre roots found by
// Newton iteration on the three-term recurrence; exactness degree is 2m - 1.

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "conflab/common.hpp"

namespace conflab::quadrature {

/// m-point rule on [0, 1] as (node, weight) pairs in ascending node order.
inline std::vector<std::pair<double, double>> gauss_legendre_01(int m) {
    if (m < 1) throw DomainError("quadrature: need at least one node");
    std::vector<std::pair<double, double>> rule(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
        // Tricomi-style initial guess for the i-th root of P_m on [-1, 1].
        double x = std::cos(M_PI * (i + 0.75) / (m + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0;
            double p1 = x;
            for (int j = 2; j <= m; ++j) {
                const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            dp = m * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule[static_cast<std::size_t>(i)] = {0.5 * (1.0 + x), 0.5 * w};
    }
    std::reverse(rule.begin(), rule.end());
    return rule;
}

}  // namespace conflab::quadrature
