#pragma once

// Mean work with imperfect detectors and thermal noise entering the unused
// ports, in the Gaussian approximation. Thermal noise can enter at the tap
// splitter (n_tau), at the homodyne splitters (n_h), on the local oscillators
// (n_lo) and at each detector's loss port (n_d).

#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>

#include "wof/error.hpp"
#include "wof/photostatistics.hpp"

namespace wof {

/// Noise environment. Detector efficiency is stored as the transmitted power
/// fraction kappa_d^2 so that efficiencies within 1e-16 of one stay exact.
struct NoiseConfig {
    double kappa_d2 = 1.0;
    double n_tau = 0.0;
    double n_h = 0.0;
    double n_lo = 0.0;
    double n_d = 0.0;

    static NoiseConfig ideal() { return {}; }

    double kappa_d() const { return std::sqrt(kappa_d2); }
    bool is_ideal() const { return kappa_d2 == 1.0 && n_tau == 0.0 && n_h == 0.0 && n_lo == 0.0 && n_d == 0.0; }

    void validate() const {
        detail::require(kappa_d2 > 0.0 && kappa_d2 <= 1.0, "NoiseConfig: detector efficiency must lie in (0, 1]");
        detail::require(n_tau >= 0.0 && n_h >= 0.0 && n_lo >= 0.0 && n_d >= 0.0,
                        "NoiseConfig: thermal occupations must be >= 0");
    }
};

/// Gaussian width D^2 of the count-difference law given the input amplitudes.
inline double gaussian_width_d2(double nbar, const SplitterConfig& cfg, const NoiseConfig& noise) {
    noise.validate();
    const double e = noise.kappa_d2;
    const double loss = 1.0 - e;
    const double b2 = cfg.beta() * cfg.beta();
    const double k2 = cfg.kappa() * cfg.kappa();
    const double tapped = cfg.epsilon() * nbar + k2 * noise.n_tau;
    const double nh = noise.n_h;
    const double nlo = noise.n_lo;
    const double nd = noise.n_d;
    return e * e * nh * nlo
         + 0.5 * e * loss * (nh + 2.0 * nlo) * nd
         + 2.0 * loss * loss * nd * nd
         + e * (1.0 + 2.0 * loss * nd) * b2
         + 0.5 * e * (e * (nh + 2.0 * nlo) + 2.0 * loss * nd + 1.0) * tapped
         + 0.5 * e * nh + e * nlo + 2.0 * loss * nd;
}

/// Variance of each count difference, kappa_d^4 beta^2 [eps nbar + k^2 n_tau] + D^2.
inline double noisy_outcome_variance(double nbar, const SplitterConfig& cfg, const NoiseConfig& noise) {
    const double b2 = cfg.beta() * cfg.beta();
    const double k2 = cfg.kappa() * cfg.kappa();
    const double tapped = cfg.epsilon() * nbar + k2 * noise.n_tau;
    return noise.kappa_d2 * noise.kappa_d2 * b2 * tapped + gaussian_width_d2(nbar, cfg, noise);
}

/// Linear estimate <x> = gain * dnx of the transmitted quadrature.
inline double noisy_feedforward_gain(double nbar, const SplitterConfig& cfg, const NoiseConfig& noise) {
    return noise.kappa_d2 * cfg.beta() * cfg.kappa() * std::sqrt(cfg.epsilon()) * (nbar - noise.n_tau) /
           noisy_outcome_variance(nbar, cfg, noise);
}

/// Mean net work: kappa_d^4 b^2 k^2 eps (nbar - n_tau)^2 / sigma^2 - 2 b^2.
inline double work_with_noise(double nbar, const SplitterConfig& cfg, const NoiseConfig& noise) {
    const double b2 = cfg.beta() * cfg.beta();
    const double k2 = cfg.kappa() * cfg.kappa();
    const double gap = nbar - noise.n_tau;
    const double num = noise.kappa_d2 * noise.kappa_d2 * b2 * k2 * cfg.epsilon() * gap * gap;
    return num / noisy_outcome_variance(nbar, cfg, noise) - cfg.lo_energy();
}

enum class NoiseCase { imperfect_detector, tau_noise, homodyne_noise, lo_noise, dark_counts };

inline const char* to_string(NoiseCase c) {
    switch (c) {
    case NoiseCase::imperfect_detector: return "imperfect_detector";
    case NoiseCase::tau_noise: return "tau_noise";
    case NoiseCase::homodyne_noise: return "homodyne_noise";
    case NoiseCase::lo_noise: return "lo_noise";
    case NoiseCase::dark_counts: return "dark_counts";
    }
    return "?";
}

inline NoiseCase parse_noise_case(std::string_view name) {
    for (NoiseCase c : {NoiseCase::imperfect_detector, NoiseCase::tau_noise, NoiseCase::homodyne_noise,
                        NoiseCase::lo_noise, NoiseCase::dark_counts})
        if (name == to_string(c)) return c;
    throw InvalidArgument("unknown noise case: " + std::string(name));
}

/// Power loss used to realize the dark-count limit kappa_d -> 1 with
/// (1 - kappa_d^2) n_d = N_D held fixed.
inline constexpr double kDarkCountLoss = 0x1p-50;

/// Noise environment that a single-parameter special case stands for.
/// imperfect_detector takes kappa_d^2; dark_counts takes N_D; the others take
/// the occupation of the noisy port.
inline NoiseConfig embed(NoiseCase c, double param) {
    NoiseConfig n;
    switch (c) {
    case NoiseCase::imperfect_detector: n.kappa_d2 = param; break;
    case NoiseCase::tau_noise: n.n_tau = param; break;
    case NoiseCase::homodyne_noise: n.n_h = param; break;
    case NoiseCase::lo_noise: n.n_lo = param; break;
    case NoiseCase::dark_counts:
        n.kappa_d2 = 1.0 - kDarkCountLoss;
        n.n_d = param / kDarkCountLoss;
        break;
    }
    n.validate();
    return n;
}

/// Closed-form work of each single-noise special case.
inline double work_special_case(NoiseCase c, double nbar, const SplitterConfig& cfg, double param) {
    const double xi = cfg.lo_energy();
    const double b2 = cfg.beta() * cfg.beta();
    const double k2 = cfg.kappa() * cfg.kappa();
    const double eps = cfg.epsilon();
    const double tap = eps * nbar;
    const double num = xi * k2 * eps * nbar * nbar;
    switch (c) {
    case NoiseCase::imperfect_detector: {
        detail::require(param > 0.0 && param <= 1.0, "work_special_case: kappa_d^2 must lie in (0, 1]");
        // the reduction of the general result; kappa_d^2 multiplies the tapped term once
        return param * num / (xi + tap * (1.0 + xi * param)) - xi;
    }
    case NoiseCase::tau_noise: {
        detail::require(param >= 0.0, "work_special_case: occupation must be >= 0");
        const double gap = nbar - param;
        return xi * k2 * eps * gap * gap / (xi + (1.0 + xi) * (tap + k2 * param)) - xi;
    }
    case NoiseCase::homodyne_noise:
        detail::require(param >= 0.0, "work_special_case: occupation must be >= 0");
        return num / (xi + tap * (1.0 + xi + param) + param) - xi;
    case NoiseCase::lo_noise:
        detail::require(param >= 0.0, "work_special_case: occupation must be >= 0");
        return num / (xi + tap * (1.0 + xi + 2.0 * param) + 2.0 * param) - xi;
    case NoiseCase::dark_counts:
        detail::require(param >= 0.0, "work_special_case: dark-count occupation must be >= 0");
        return num / (xi + tap * (1.0 + xi + 2.0 * param) + 4.0 * param * (1.0 + b2 + param)) - xi;
    }
    throw InvalidArgument("work_special_case: unknown case");
}

} // namespace wof
