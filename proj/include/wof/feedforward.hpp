#pragma once

// Bayesian inversion of a homodyne record and the state of the transmitted
// mode conditioned on it. The posterior over the input amplitude is a
// P-function density; the conditional quantum state adds the vacuum half
// quantum to its variances exactly once, in conditional_state.

#include <cmath>
#include <numbers>
#include <optional>

#include "wof/error.hpp"
#include "wof/phase_space.hpp"
#include "wof/photostatistics.hpp"
#include "wof/thermal_quadrature.hpp"

namespace wof {

inline constexpr double kImprobableThreshold = 1e-300;

/// Thermal P-function with nbar quanta, as a density in (x, p).
inline double thermal_density(double nbar, double x, double p) {
    return std::exp(-(x * x + p * p) / (2.0 * nbar)) / (2.0 * std::numbers::pi * nbar);
}

/// P(alpha | out) for thermal input, evaluated pointwise.
class Posterior {
public:
    Posterior(Outcome out, double nbar, const SplitterConfig& cfg, double normalization, int grid_level, int half_width)
        : out_(out), nbar_(nbar), cfg_(cfg), normalization_(normalization), grid_level_(grid_level),
          half_width_(half_width) {}

    Outcome outcome() const noexcept { return out_; }
    /// P(out), the Bayes denominator.
    double normalization() const noexcept { return normalization_; }
    int grid_level() const noexcept { return grid_level_; }
    int half_width() const noexcept { return half_width_; }

    double unnormalized(double x, double p) const {
        return outcome_pmf_given_alpha(out_, {x, p}, cfg_) * thermal_density(nbar_, x, p);
    }
    double operator()(double x, double p) const { return unnormalized(x, p) / normalization_; }

private:
    Outcome out_;
    double nbar_;
    SplitterConfig cfg_;
    double normalization_;
    int grid_level_;
    int half_width_;
};

inline Posterior posterior(Outcome out, const ThermalTable& table) {
    if (!table.contains(out)) throw InvalidArgument("posterior: outcome outside the truncation lattice");
    const double norm = table.probability(out);
    if (!(norm >= kImprobableThreshold)) throw ImprobableOutcome("posterior: outcome probability below 1e-300", norm);
    return {out, table.nbar(), table.config(), norm, table.level(), table.half_width()};
}

inline Posterior posterior(Outcome out, double nbar, const SplitterConfig& cfg, const QuadratureOptions& opts = {}) {
    return posterior(out, thermal_table(nbar, cfg, opts));
}

/// Moments of the transmitted mode after the measurement returned `out`.
struct ConditionalState {
    GaussianMoments moments;
};

/// Linear gain of the Gaussian-approximation estimate x_bar = gain * dnx:
/// 1 / (beta sqrt(1-k^2) [1 + 1/(nbar(1-k^2)) + 1/(2 beta^2)]), written in a
/// form that stays finite at beta = 0.
inline double gaussian_estimate_gain(double nbar, const SplitterConfig& cfg) {
    const double eps = cfg.epsilon();
    const double b = cfg.beta();
    const double b2 = b * b;
    return 2.0 * b * nbar * std::sqrt(eps) / (2.0 * b2 * nbar * eps + 2.0 * b2 + nbar * eps);
}

/// Posterior P-function variance per quadrature in the Gaussian approximation.
inline double gaussian_posterior_variance(double nbar, const SplitterConfig& cfg) {
    const double xi = cfg.lo_energy();
    const double tap = nbar * cfg.epsilon();
    return nbar / (1.0 + xi * tap / (xi + tap));
}

inline ConditionalState conditional_state(Outcome out, const ThermalTable& table) {
    if (!table.contains(out)) throw InvalidArgument("conditional_state: outcome outside the truncation lattice");
    const double prob = table.probability(out);
    if (!(prob >= kImprobableThreshold)) throw ImprobableOutcome("conditional_state: outcome probability below 1e-300", prob);
    return {table.transmitted_moments(out)};
}

inline ConditionalState conditional_state_gaussian(Outcome out, double nbar, const SplitterConfig& cfg) {
    const double kappa = cfg.kappa();
    const double gain = gaussian_estimate_gain(nbar, cfg);
    const double v = kappa * kappa * gaussian_posterior_variance(nbar, cfg) + 0.5;
    return {GaussianMoments(kappa * gain * out.dnx, kappa * gain * out.dnp, v, v, 0.0)};
}

inline ConditionalState conditional_state(Outcome out, double nbar, const SplitterConfig& cfg, Mode mode,
                                          const QuadratureOptions& opts = {}) {
    detail::require(nbar > 0.0, "conditional_state: nbar must be positive");
    switch (mode) {
    case Mode::exact: return conditional_state(out, thermal_table(nbar, cfg, opts));
    case Mode::gaussian: return conditional_state_gaussian(out, nbar, cfg);
    default: throw InvalidArgument("conditional_state: mode must be exact or gaussian");
    }
}

/// Work released for outcome `out`: displacement, plus unsqueezing if asked.
inline double outcome_work(const ConditionalState& state, bool with_unsqueeze) {
    double w = displacement_work(state.moments);
    if (with_unsqueeze) w += unsqueeze_work(state.moments);
    return w;
}

inline double outcome_work(Outcome out, double nbar, const SplitterConfig& cfg, Mode mode, bool with_unsqueeze,
                           const QuadratureOptions& opts = {}) {
    return outcome_work(conditional_state(out, nbar, cfg, mode, opts), with_unsqueeze);
}

/// One row of the per-outcome work table.
struct OutcomeWorkRow {
    Outcome outcome;
    double prob;
    double w_displacement;
    double w_unsqueeze;
};

/// Per-outcome probability and work over the whole lattice.
inline std::vector<OutcomeWorkRow> outcome_work_table(double nbar, const SplitterConfig& cfg, Mode mode,
                                                      const QuadratureOptions& opts = {}) {
    std::vector<OutcomeWorkRow> rows;
    if (mode == Mode::exact) {
        const ThermalTable table = thermal_table(nbar, cfg, opts);
        const int n = table.half_width();
        rows.reserve(static_cast<std::size_t>(table.width()) * table.width());
        for (int i = -n; i <= n; ++i) {
            for (int j = -n; j <= n; ++j) {
                const double prob = table.probability({i, j});
                if (prob < kImprobableThreshold) {
                    rows.push_back({{i, j}, prob, 0.0, 0.0});
                    continue;
                }
                const GaussianMoments m = table.transmitted_moments({i, j});
                rows.push_back({{i, j}, prob, displacement_work(m), unsqueeze_work(m)});
            }
        }
        return rows;
    }
    const OutcomeDistribution dist = outcome_distribution_thermal(nbar, cfg, Mode::gaussian, opts);
    const int n = dist.half_width();
    for (int i = -n; i <= n; ++i) {
        for (int j = -n; j <= n; ++j) {
            const ConditionalState s = conditional_state_gaussian({i, j}, nbar, cfg);
            rows.push_back({{i, j}, dist[{i, j}], displacement_work(s.moments), unsqueeze_work(s.moments)});
        }
    }
    return rows;
}

} // namespace wof
