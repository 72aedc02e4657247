#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "wof/error.hpp"

namespace wof {

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Gauss-Legendre rule on [a, b], nodes by Newton iteration on P_n.
inline QuadratureRule gauss_legendre(int n, double a = -1.0, double b = 1.0) {
    detail::require(n >= 1, "gauss_legendre: need at least one node");
    QuadratureRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (b + a);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0;
            double p1 = 0.0;
            for (int j = 1; j <= n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
            }
            dp = n * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-15) break;
        }
        // recompute derivative at the converged node
        double p0 = 1.0;
        double p1 = 0.0;
        for (int j = 1; j <= n; ++j) {
            const double p2 = p1;
            p1 = p0;
            p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
        }
        dp = n * (z * p0 - p1) / (z * z - 1.0);
        const double w = 2.0 / ((1.0 - z * z) * dp * dp);
        rule.nodes[i] = mid - half * z;
        rule.nodes[n - 1 - i] = mid + half * z;
        rule.weights[i] = half * w;
        rule.weights[n - 1 - i] = half * w;
    }
    return rule;
}

/// Composite Gauss-Legendre: `panels` equal panels of `order` nodes each.
inline QuadratureRule composite_gauss_legendre(int panels, int order, double a, double b) {
    detail::require(panels >= 1, "composite_gauss_legendre: need at least one panel");
    const QuadratureRule unit = gauss_legendre(order, 0.0, 1.0);
    QuadratureRule rule;
    rule.nodes.reserve(static_cast<std::size_t>(panels) * order);
    rule.weights.reserve(static_cast<std::size_t>(panels) * order);
    const double width = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
        const double left = a + p * width;
        for (int i = 0; i < order; ++i) {
            rule.nodes.push_back(left + width * unit.nodes[i]);
            rule.weights.push_back(width * unit.weights[i]);
        }
    }
    return rule;
}

} // namespace wof
