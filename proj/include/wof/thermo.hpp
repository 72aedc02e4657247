#pragma once

// Detector heating, the Landauer cost of resetting the four detectors, the
// resulting net work and efficiency, and two comparator engines: the
// photodetection Szilard engine and the finite-time Otto cycle.

#include <cmath>
#include <numbers>

#include "wof/engine.hpp"
#include "wof/error.hpp"
#include "wof/noise.hpp"
#include "wof/photostatistics.hpp"

namespace wof {

/// Mean thermal occupation 1/(e^{1/t} - 1) of a mode at scaled temperature t.
inline double bose_occupation(double t) {
    detail::require(t >= 0.0, "bose_occupation: temperature must be >= 0");
    if (t == 0.0) return 0.0;
    return 1.0 / std::expm1(1.0 / t);
}

struct DetectorThermalState {
    double n_d0 = 0.0;  // occupation before the measurement
    double t_d = 0.0;   // k_B T_D / hbar omega

    /// Detector in equilibrium at its own reset temperature.
    static DetectorThermalState at_temperature(double t_d) { return {bose_occupation(t_d), t_d}; }

    void validate() const {
        detail::require(n_d0 >= 0.0 && t_d >= 0.0, "DetectorThermalState: fields must be >= 0");
    }
};

/// Mean photon number each detector absorbs in one measurement.
inline double detector_load(double nbar, const SplitterConfig& cfg, const NoiseConfig& noise) {
    noise.validate();
    const double k2 = cfg.kappa() * cfg.kappa();
    const double b2 = cfg.beta() * cfg.beta();
    return noise.kappa_d2 * (0.25 * cfg.epsilon() * nbar + 0.25 * k2 * noise.n_tau + 0.25 * noise.n_h + 0.5 * b2 +
                             0.5 * noise.n_lo) +
           (1.0 - noise.kappa_d2) * noise.n_d;
}

/// Entropy in nats of a thermal mode with mean occupation n.
inline double bose_entropy(double n) {
    detail::require(n >= 0.0, "bose_entropy: occupation must be >= 0");
    if (n == 0.0) return 0.0;
    return (n + 1.0) * std::log1p(n) - n * std::log(n);
}

struct ResetCost {
    double i_bits = 0.0;   // information stored in the four detectors
    double q_reset = 0.0;  // Landauer heat, in quanta
};

inline ResetCost reset_cost(double load, const DetectorThermalState& det) {
    detail::require(load >= 0.0, "reset_cost: load must be >= 0");
    det.validate();
    ResetCost c;
    c.i_bits = 4.0 * (bose_entropy(load + det.n_d0) - bose_entropy(det.n_d0)) / std::numbers::ln2;
    c.q_reset = c.i_bits * det.t_d * std::numbers::ln2;
    return c;
}

/// Large-nbar shorthand (1/2) ln(nbar/4) for the stored information. It does
/// not follow from the entropy difference above, which grows as
/// (4 + 2 ln(nbar/4))/ln 2 bits; reported for comparison only.
inline double information_shorthand(double nbar) {
    detail::require(nbar > 0.0, "information_shorthand: nbar must be positive");
    return 0.5 * std::log(nbar / 4.0);
}

/// Energy flows of one cycle. Work terms are net of the LO energy.
struct BudgetInputs {
    double w_displacement = 0.0;
    double w_unsqueeze = 0.0;
    double e_lo = 0.0;
    double e_det = 0.0;
    double e_rem = 0.0;
    double q_reset = 0.0;
};

struct WorkBudget {
    double w_displacement = 0.0;
    double w_unsqueeze = 0.0;
    double e_lo = 0.0;
    double e_det = 0.0;
    double e_rem = 0.0;
    double q_reset = 0.0;
    double w_net = 0.0;
    double eta = 0.0;
    double eta_max1 = 0.0;     // single-measurement bound W_max / E_in
    double eta_reverse = 0.0;  // 1 - E_rem / E_in
};

inline WorkBudget efficiency(double nbar, const BudgetInputs& in) {
    detail::require(nbar > 0.0, "efficiency: nbar must be positive");
    WorkBudget b;
    b.w_displacement = in.w_displacement;
    b.w_unsqueeze = in.w_unsqueeze;
    b.e_lo = in.e_lo;
    b.e_det = in.e_det;
    b.e_rem = in.e_rem;
    b.q_reset = in.q_reset;
    b.w_net = in.w_displacement + in.w_unsqueeze - in.q_reset;
    b.eta = b.w_net / nbar;
    b.eta_max1 = w_max_analytic(nbar).w_max / nbar;
    b.eta_reverse = 1.0 - in.e_rem / nbar;
    return b;
}

/// Budget of the Gaussian-approximation engine at one configuration.
inline WorkBudget work_budget(double nbar, const SplitterConfig& cfg, const NoiseConfig& noise,
                             const DetectorThermalState& det) {
    const double load = detector_load(nbar, cfg, noise);
    BudgetInputs in;
    in.w_displacement = work_with_noise(nbar, cfg, noise);
    in.e_lo = cfg.lo_energy();
    in.e_det = 4.0 * load;
    // transmitted energy kappa^2 nbar + eps n_tau less what feedforward took out
    const double k2 = cfg.kappa() * cfg.kappa();
    in.e_rem = std::max(k2 * nbar + cfg.epsilon() * noise.n_tau - (in.w_displacement + in.e_lo), 0.0);
    in.q_reset = reset_cost(load, det).q_reset;
    return efficiency(nbar, in);
}

/// Configuration maximizing the noisy Gaussian work at fixed noise.
inline OptimalPoint optimize_with_noise(double nbar, const NoiseConfig& noise, const OptimizeOptions& opts = {}) {
    noise.validate();
    return maximize_over_splitter(
        nbar, [&](double eps, double xi) { return work_with_noise(nbar, SplitterConfig::from_tap(eps, xi), noise); },
        opts);
}

enum class OttoRegime { frictionless, sudden };

struct OttoBounds {
    double eta = 0.0;
    double w_bound = 0.0;  // work per relaxation window 1/Gamma_h at the optimal compression
    double p_bound = 0.0;  // high-temperature power bound, in units of Gamma_h
};

/// Finite-time Otto cycle in the high-temperature limit. gamma_ratio is
/// Gamma_c / Gamma_h; the sudden-regime expressions assume equal rates.
inline OttoBounds otto_comparator(double t_h, double t_c, double gamma_ratio, OttoRegime regime) {
    detail::require(t_h > t_c && t_c > 0.0, "otto_comparator: need t_h > t_c > 0");
    detail::require(gamma_ratio > 0.0, "otto_comparator: gamma_ratio must be positive");
    const double s = std::sqrt(t_c / t_h);
    OttoBounds o;
    if (regime == OttoRegime::frictionless) {
        // compression sqrt(T_h/T_c): quasistatic work (sqrt T_h - sqrt T_c)^2
        const double rates = gamma_ratio / ((1.0 + std::sqrt(gamma_ratio)) * (1.0 + std::sqrt(gamma_ratio)));
        const double quasistatic = (std::sqrt(t_h) - std::sqrt(t_c)) * (std::sqrt(t_h) - std::sqrt(t_c));
        o.eta = 1.0 - s;
        o.w_bound = quasistatic * rates;
        o.p_bound = t_h * rates;
        return o;
    }
    // compression (T_h/T_c)^{1/4}
    const double x = t_h / t_c;
    o.eta = (1.0 - s) / (2.0 + s);
    o.w_bound = 0.25 * t_c * (std::sqrt(x) - 1.0) * (std::sqrt(x) - 1.0);
    o.p_bound = 0.25 * t_h;
    return o;
}

enum class SzilardVariant { unbiased, optimized };

/// Efficiency bound of the two-beam click/no-click photodetection engine.
inline double szilard_comparator(SzilardVariant variant) {
    // unbiased: nbar/2 of 2 nbar; optimized clicks (1/3, 2/3): (16/27) nbar of 2 nbar
    return variant == SzilardVariant::unbiased ? 0.25 : 8.0 / 27.0;
}

} // namespace wof
