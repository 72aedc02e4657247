#pragma once

// Exponentially scaled modified Bessel functions of the first kind,
// Ie_k(z) = I_k(z) exp(-z), for integer orders k >= 0 and real z >= 0.
//
// Values are produced in log space so that callers multiplying by large
// prefactors (the Skellam (m1/m2)^(k/2) term) never overflow. Order ratios
// I_k / I_{k-1} come from a downward Miller recurrence; the absolute scale
// comes from the Neumann identity 1 = Ie_0 + 2 sum_k Ie_k for moderate z and
// from the Hankel asymptotic series of Ie_0 above kAsymptoticThreshold.

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "wof/error.hpp"

namespace wof {

inline constexpr double kAsymptoticThreshold = 700.0;

namespace detail {

// Hankel large-argument series for Ie_0; terms decrease monotonically until
// j ~ 2z, far beyond where they drop below double precision for z > 700.
inline double scaled_bessel_i0_asymptotic(double z) {
    double sum = 1.0;
    double term = 1.0;
    for (int j = 1; j < 60; ++j) {
        const double odd = 2.0 * j - 1.0;
        term *= odd * odd / (8.0 * j * z);
        sum += term;
        if (term < 1e-17 * sum) break;
    }
    return sum / std::sqrt(2.0 * std::numbers::pi * z);
}

} // namespace detail

/// log(I_k(z) e^{-z}) for k = 0..kmax. Entries are -inf where the value is 0.
/// `log_half_z` may be supplied when z underflows but log(z/2) is still known.
inline std::vector<double> log_scaled_bessel_i(int kmax, double z,
                                               double log_half_z = std::numeric_limits<double>::quiet_NaN()) {
    detail::require(kmax >= 0, "log_scaled_bessel_i: negative order");
    detail::require(z >= 0.0, "log_scaled_bessel_i: negative argument");
    std::vector<double> out(static_cast<std::size_t>(kmax) + 1);
    constexpr double neg_inf = -std::numeric_limits<double>::infinity();
    if (std::isnan(log_half_z)) log_half_z = z > 0.0 ? std::log(0.5 * z) : neg_inf;

    if (z == 0.0 && log_half_z == neg_inf) {
        out[0] = 0.0;
        for (int k = 1; k <= kmax; ++k) out[k] = neg_inf;
        return out;
    }

    if (z < 1e-8) {
        // Two-term power series: I_k(z) = (z/2)^k / k! [1 + (z/2)^2 / (k+1) + ...]
        const double q = std::exp(2.0 * log_half_z);
        for (int k = 0; k <= kmax; ++k) {
            out[k] = k * log_half_z - std::lgamma(k + 1.0) + std::log1p(q / (k + 1.0)) - z;
        }
        return out;
    }

    // Downward recurrence for ratios r_k = I_k / I_{k-1}:
    //   r_k = 1 / (2k/z + r_{k+1}).
    // Starting error is damped by prod r_j^2 ~ exp(-(K^2 - k^2)/z).
    const int kstart = kmax + 20 + static_cast<int>(std::ceil(10.0 * std::sqrt(z)));
    std::vector<double> ratio(static_cast<std::size_t>(kstart) + 2, 0.0);
    for (int k = kstart; k >= 1; --k) ratio[k] = 1.0 / (2.0 * k / z + ratio[k + 1]);

    double log_i0;
    if (z > kAsymptoticThreshold) {
        log_i0 = std::log(detail::scaled_bessel_i0_asymptotic(z));
    } else {
        // Neumann series: 1 = Ie_0 (1 + 2 sum_{k>=1} prod_{j<=k} r_j)
        double sum = 0.0;
        double prod = 1.0;
        for (int k = 1; k <= kstart; ++k) {
            prod *= ratio[k];
            sum += prod;
            if (prod < 1e-18 * sum) break;
        }
        log_i0 = -std::log1p(2.0 * sum);
    }

    out[0] = log_i0;
    for (int k = 1; k <= kmax; ++k) {
        out[k] = ratio[k] > 0.0 ? out[k - 1] + std::log(ratio[k]) : neg_inf;
    }
    return out;
}

/// I_k(z) e^{-z} for a single order.
inline double scaled_bessel_i(int k, double z) {
    if (k < 0) k = -k;
    return std::exp(log_scaled_bessel_i(k, z).back());
}

} // namespace wof
