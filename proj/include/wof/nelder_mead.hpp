#pragma once

// Box-constrained Nelder-Mead minimization. Trial points are projected onto
// the box, so the simplex can collapse onto a face when the minimum sits on
// a bound.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numeric>

namespace wof {

struct NelderMeadOptions {
    double diameter_tolerance = 1e-6;
    int max_evaluations = 4000;
    int restarts = 1;  // fresh simplex around the result, guards against early collapse
};

template <std::size_t N>
struct NelderMeadResult {
    std::array<double, N> x{};
    double value = 0.0;
    int evaluations = 0;
    bool converged = false;
};

template <std::size_t N, class F>
NelderMeadResult<N> nelder_mead(F&& f, std::array<double, N> start, std::array<double, N> step,
                                const std::array<double, N>& lower, const std::array<double, N>& upper,
                                const NelderMeadOptions& opts = {}) {
    using Point = std::array<double, N>;
    auto project = [&](Point p) {
        for (std::size_t i = 0; i < N; ++i) p[i] = std::clamp(p[i], lower[i], upper[i]);
        return p;
    };

    NelderMeadResult<N> result;
    auto eval = [&](const Point& p) {
        ++result.evaluations;
        return f(p);
    };

    Point best = project(start);
    double best_value = eval(best);

    for (int round = 0; round <= opts.restarts; ++round) {
        std::array<Point, N + 1> simplex;
        std::array<double, N + 1> values;
        simplex[0] = best;
        values[0] = best_value;
        for (std::size_t i = 0; i < N; ++i) {
            Point p = best;
            p[i] += step[i];
            if (p[i] > upper[i]) p[i] = best[i] - step[i];
            p = project(p);
            simplex[i + 1] = p;
            values[i + 1] = eval(p);
        }

        bool converged = false;
        while (result.evaluations < opts.max_evaluations) {
            std::array<std::size_t, N + 1> order;
            std::iota(order.begin(), order.end(), std::size_t{0});
            std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });
            {
                auto s = simplex;
                auto v = values;
                for (std::size_t i = 0; i <= N; ++i) {
                    simplex[i] = s[order[i]];
                    values[i] = v[order[i]];
                }
            }

            double diameter = 0.0;
            for (std::size_t i = 1; i <= N; ++i) {
                double d2 = 0.0;
                for (std::size_t k = 0; k < N; ++k) d2 += (simplex[i][k] - simplex[0][k]) * (simplex[i][k] - simplex[0][k]);
                diameter = std::max(diameter, std::sqrt(d2));
            }
            if (diameter < opts.diameter_tolerance) {
                converged = true;
                break;
            }

            Point centroid{};
            for (std::size_t i = 0; i < N; ++i)
                for (std::size_t k = 0; k < N; ++k) centroid[k] += simplex[i][k] / N;
            auto along = [&](double t) {
                Point p;
                for (std::size_t k = 0; k < N; ++k) p[k] = centroid[k] + t * (simplex[N][k] - centroid[k]);
                return project(p);
            };

            const Point reflected = along(-1.0);
            const double fr = eval(reflected);
            if (fr < values[0]) {
                const Point expanded = along(-2.0);
                const double fe = eval(expanded);
                if (fe < fr) {
                    simplex[N] = expanded;
                    values[N] = fe;
                } else {
                    simplex[N] = reflected;
                    values[N] = fr;
                }
                continue;
            }
            if (fr < values[N - 1]) {
                simplex[N] = reflected;
                values[N] = fr;
                continue;
            }
            const bool outside = fr < values[N];
            const Point contracted = along(outside ? -0.5 : 0.5);
            const double fc = eval(contracted);
            if (fc < (outside ? fr : values[N])) {
                simplex[N] = contracted;
                values[N] = fc;
                continue;
            }
            for (std::size_t i = 1; i <= N; ++i) {
                for (std::size_t k = 0; k < N; ++k) simplex[i][k] = simplex[0][k] + 0.5 * (simplex[i][k] - simplex[0][k]);
                simplex[i] = project(simplex[i]);
                values[i] = eval(simplex[i]);
            }
        }

        const auto it = std::min_element(values.begin(), values.end());
        const std::size_t k = static_cast<std::size_t>(it - values.begin());
        const bool improved = values[k] < best_value;
        if (values[k] <= best_value) {
            best = simplex[k];
            best_value = values[k];
        }
        result.converged = converged;
        if (!converged) break;
        if (round > 0 && !improved) break;
        for (std::size_t i = 0; i < N; ++i) step[i] = std::max(10.0 * opts.diameter_tolerance, 0.05 * std::abs(step[i]));
    }

    result.x = best;
    result.value = best_value;
    return result;
}

} // namespace wof
