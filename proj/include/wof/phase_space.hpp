#pragma once

// Single-mode Gaussian phase-space moments and the work released by the two
// unitary steps the engine uses: displacement to the origin and unsqueezing
// to equal principal variances. Units: hbar = omega = 1, H = (x^2 + p^2)/2.

#include <algorithm>
#include <cmath>

#include "wof/error.hpp"

namespace wof {

inline constexpr double kHeisenbergTolerance = 1e-9;

/// First and second moments of one bosonic mode. Variances are symmetrized
/// quantum variances, so the vacuum has v11 = v22 = 1/2.
class GaussianMoments {
public:
    GaussianMoments(double mean_x, double mean_p, double v11, double v22, double v12)
        : mean_x_(mean_x), mean_p_(mean_p), v11_(v11), v22_(v22), v12_(v12) {
        detail::require(std::isfinite(mean_x) && std::isfinite(mean_p), "GaussianMoments: non-finite mean");
        detail::require(v11 > 0.0 && v22 > 0.0, "GaussianMoments: variances must be positive");
        detail::require(v11 * v22 - v12 * v12 >= 0.25 - kHeisenbergTolerance,
                        "GaussianMoments: variance matrix violates the uncertainty bound det V >= 1/4");
    }

    static GaussianMoments vacuum() { return {0.0, 0.0, 0.5, 0.5, 0.0}; }

    double mean_x() const noexcept { return mean_x_; }
    double mean_p() const noexcept { return mean_p_; }
    double v11() const noexcept { return v11_; }
    double v22() const noexcept { return v22_; }
    double v12() const noexcept { return v12_; }

    double determinant() const noexcept { return v11_ * v22_ - v12_ * v12_; }

    /// <H> including the vacuum half quantum.
    double energy() const noexcept {
        return 0.5 * (mean_x_ * mean_x_ + mean_p_ * mean_p_) + 0.5 * (v11_ + v22_);
    }

    /// Phase-space rotation by `angle` (free evolution over that phase).
    GaussianMoments rotated(double angle) const {
        const double c = std::cos(angle);
        const double s = std::sin(angle);
        const double mx = c * mean_x_ - s * mean_p_;
        const double mp = s * mean_x_ + c * mean_p_;
        const double a = c * c * v11_ - 2.0 * c * s * v12_ + s * s * v22_;
        const double b = s * s * v11_ + 2.0 * c * s * v12_ + c * c * v22_;
        const double off = c * s * (v11_ - v22_) + (c * c - s * s) * v12_;
        return {mx, mp, a, b, off};
    }

private:
    double mean_x_;
    double mean_p_;
    double v11_;
    double v22_;
    double v12_;
};

struct PrincipalVariances {
    double v_plus;
    double v_minus;
};

/// Eigenvalues of the 2x2 variance matrix, v_plus >= v_minus.
inline PrincipalVariances principal_variances(const GaussianMoments& state) {
    const double half_trace = 0.5 * (state.v11() + state.v22());
    const double radius = 0.5 * std::hypot(state.v11() - state.v22(), 2.0 * state.v12());
    const double v_plus = half_trace + radius;
    // smaller root via the determinant avoids cancellation for thin ellipses
    const double v_minus = radius == 0.0 ? half_trace : state.determinant() / v_plus;
    return {v_plus, v_minus};
}

/// Work released by displacing the state back to the phase-space origin.
inline double displacement_work(const GaussianMoments& state) noexcept {
    return 0.5 * (state.mean_x() * state.mean_x() + state.mean_p() * state.mean_p());
}

/// Work released by unsqueezing a centred state to equal principal variances:
/// (V+ + V-)/2 - sqrt(V+ V-).
inline double unsqueeze_work(const GaussianMoments& state) {
    const double arithmetic = 0.5 * (state.v11() + state.v22());
    const double geometric = std::sqrt(std::max(state.determinant(), 0.0));
    // (a - g) = (a^2 - g^2) / (a + g); a^2 - g^2 = ((v11 - v22)/2)^2 + v12^2
    const double gap = 0.25 * (state.v11() - state.v22()) * (state.v11() - state.v22()) + state.v12() * state.v12();
    return gap / (arithmetic + geometric);
}

/// Energy of the passive Gaussian state left after both steps, sqrt(V+ V-).
inline double passive_energy(const GaussianMoments& state) {
    return std::sqrt(std::max(state.determinant(), 0.0));
}

} // namespace wof
