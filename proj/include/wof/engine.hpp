#pragma once

// Mean work of the engine, its optimization over the tap fraction and the
// local-oscillator strength, the energy budget, and reuse of the remainder.
//
// The optimizer works in (epsilon, xi) = (1 - kappa^2, 2 beta^2).

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "wof/error.hpp"
#include "wof/feedforward.hpp"
#include "wof/nelder_mead.hpp"
#include "wof/photostatistics.hpp"
#include "wof/thermal_quadrature.hpp"

namespace wof {

struct WorkEstimate {
    double w_mean = 0.0;        // net of the LO energy 2 beta^2
    double w_rms = 0.0;         // spread of the per-outcome extracted work
    double e_rem = 0.0;         // energy left in the transmitted mode above vacuum
    Mode mode = Mode::gaussian;
    double w_gross = 0.0;       // displacement work before subtracting the LO energy
    double w_unsqueeze = 0.0;   // mean unsqueezing work (exact mode only)
    double truncation_residual = 0.0;
};

struct OptimalPoint {
    double kappa = 0.0;
    double beta = 0.0;
    double w_max = 0.0;
    double epsilon = 0.0;
    double xi = 0.0;
    bool extractable = false;  // w_max > 0
};

namespace detail {

inline OptimalPoint make_point(double epsilon, double xi, double w) {
    OptimalPoint pt;
    pt.epsilon = epsilon;
    pt.xi = xi;
    pt.kappa = std::sqrt(1.0 - epsilon);
    pt.beta = std::sqrt(std::max(xi, 0.0) / 2.0);
    pt.w_max = w;
    pt.extractable = w > 0.0;
    return pt;
}

} // namespace detail

/// Closed-form mean net work in the Gaussian approximation, as a function of
/// epsilon = 1 - kappa^2 and xi = 2 beta^2:
///   nbar (1 - eps) / (1 + 1/xi + 1/(eps nbar)) - xi.
inline double gaussian_work(double nbar, double epsilon, double xi) {
    if (xi <= 0.0) return 0.0;
    const double tap = epsilon * nbar;
    // 2b^2 k^2 eps n^2 / (2b^2 + eps (1 + 2b^2) n) - 2b^2
    return xi * (1.0 - epsilon) * tap * nbar / (xi + tap * (1.0 + xi)) - xi;
}

/// Low-excitation counterpart: 2b^2 k^2 eps n^2 / (2b^2 + eps n) - 2b^2.
inline double low_excitation_work(double nbar, double epsilon, double xi) {
    if (xi <= 0.0) return 0.0;
    const double tap = epsilon * nbar;
    return xi * (1.0 - epsilon) * tap * nbar / (xi + tap) - xi;
}

/// Mean work summed over an exact outcome table.
inline WorkEstimate mean_work(const ThermalTable& table, bool with_unsqueeze) {
    const TableSummary s = summarize(table);
    const SplitterConfig& cfg = table.config();
    const double k2 = cfg.kappa() * cfg.kappa();
    WorkEstimate est;
    est.mode = Mode::exact;
    est.w_gross = s.gross_work;
    est.w_unsqueeze = s.unsqueeze_work;
    double mean = s.gross_work;
    double second = s.work_second_moment;
    if (with_unsqueeze) {
        mean += s.unsqueeze_work;
        second += 2.0 * s.cross_moment + s.unsqueeze_second_moment;
    }
    est.w_mean = mean - cfg.lo_energy();
    est.w_rms = std::sqrt(std::max(second - mean * mean, 0.0));
    est.e_rem = std::max(k2 * table.nbar() - mean, 0.0);
    est.truncation_residual = table.truncation_residual();
    return est;
}

inline WorkEstimate mean_work(double nbar, const SplitterConfig& cfg, Mode mode, bool with_unsqueeze = false,
                              const QuadratureOptions& opts = {}) {
    detail::require(nbar > 0.0, "mean_work: nbar must be positive");
    if (mode == Mode::exact) return mean_work(thermal_table(nbar, cfg, opts), with_unsqueeze);

    const double eps = cfg.epsilon();
    const double xi = cfg.lo_energy();
    const double k2 = cfg.kappa() * cfg.kappa();
    WorkEstimate est;
    est.mode = mode;
    est.e_rem = k2 * gaussian_posterior_variance(nbar, cfg);
    if (mode == Mode::gaussian) {
        est.w_mean = gaussian_work(nbar, eps, xi);
        est.w_gross = est.w_mean + xi;
        est.w_rms = est.w_gross;
        return est;
    }
    detail::require(mode == Mode::low_excitation, "mean_work: unknown mode");
    est.w_mean = low_excitation_work(nbar, eps, xi);
    est.w_gross = est.w_mean + xi;
    // outcomes (+-1, 0), (0, +-1), each with probability b^2/2 + eps nbar/4
    const double q = 0.5 * cfg.beta() * cfg.beta() + 0.25 * eps * nbar;
    const double mean_one = xi > 0.0 ? est.w_gross / (4.0 * q) : 0.0;
    est.w_rms = std::sqrt(std::max(4.0 * q * mean_one * mean_one - est.w_gross * est.w_gross, 0.0));
    return est;
}

/// Analytic optimum of the Gaussian-approximation work.
/// eps = (sqrt(n - sqrt(n) + 1) - 1)/n, xi = (sqrt(n(1-eps)) - 1)/(1 + 1/(eps n)),
/// W_max = (sqrt(n - sqrt(n) + 1) - 1)^2 (1 - 1/sqrt(n)).
/// For nbar < 1 epsilon comes out negative and the point is not a physical
/// splitter; only the sign of w_max is meaningful there.
inline OptimalPoint w_max_analytic(double nbar) {
    detail::require(nbar > 0.0, "w_max_analytic: nbar must be positive");
    const double root_n = std::sqrt(nbar);
    const double s = std::sqrt(nbar - root_n + 1.0) - 1.0;
    const double eps = s / nbar;
    const double xi = (std::sqrt(nbar * (1.0 - eps)) - 1.0) / (1.0 + 1.0 / (eps * nbar));
    const double w = s * s * (1.0 - 1.0 / root_n);
    return detail::make_point(eps, std::isfinite(xi) ? xi : 0.0, w);
}

enum class Regime { high_T, low_T_gaussian, low_T_exact };

/// Limiting forms of the optimal work.
inline double w_max_limits(double nbar, Regime regime) {
    detail::require(nbar > 0.0, "w_max_limits: nbar must be positive");
    const double d = nbar - 1.0;
    switch (regime) {
    case Regime::high_T: return nbar - 4.0 * std::sqrt(nbar) + 6.0;
    case Regime::low_T_gaussian: return d * d * d / 32.0;
    case Regime::low_T_exact: return 9.0 / 256.0 * d * d * d;
    }
    throw InvalidArgument("w_max_limits: unknown regime");
}

/// Optimum of the exact photocount statistics near nbar = 1:
/// W = (n - sqrt n)/2 (sqrt((n + sqrt n)/2) - 1)^2.
inline OptimalPoint w_max_low_excitation(double nbar) {
    detail::require(nbar > 0.0, "w_max_low_excitation: nbar must be positive");
    const double root_n = std::sqrt(nbar);
    const double a = 0.5 * (nbar - root_n);
    const double b = std::sqrt(0.5 * (nbar + root_n)) - 1.0;
    return detail::make_point(0.5 * (1.0 - 1.0 / root_n), a * b, a * b * b);
}

struct OptimizeOptions {
    NelderMeadOptions simplex{};
    int grid = 32;
    double stationarity_tolerance = 1e-5;
    QuadratureOptions quadrature{};
};

inline constexpr double kEpsilonLower = 1e-6;
inline constexpr double kEpsilonUpper = 1.0 - 1e-6;
inline constexpr double kXiLower = 1e-10;

namespace detail {

// Central-difference gradient of f scaled by the coordinates and the value,
// ignoring coordinates pinned at a bound.
template <class F>
double relative_gradient(F&& f, std::array<double, 2> v, double value, const std::array<double, 2>& lower,
                         const std::array<double, 2>& upper) {
    double norm2 = 0.0;
    for (int i = 0; i < 2; ++i) {
        const double h = 1e-5 * std::max(std::abs(v[i]), 1e-4);
        if (v[i] - h < lower[i] || v[i] + h > upper[i]) continue;
        auto plus = v;
        auto minus = v;
        plus[i] += h;
        minus[i] -= h;
        const double g = (f(plus) - f(minus)) / (2.0 * h);
        norm2 += g * v[i] * (g * v[i]);
    }
    return std::sqrt(norm2) / std::max(std::abs(value), 1e-12);
}

inline std::array<double, 2> splitter_upper(double nbar) { return {kEpsilonUpper, std::max(nbar, 2.0 * kXiLower)}; }

// Best point of a log-spaced grid over (epsilon, xi).
template <class F>
std::array<double, 2> grid_seed(double nbar, F&& f, int points) {
    const int g = std::max(points, 2);
    const double xi_hi = splitter_upper(nbar)[1];
    const double xi_lo = std::min(1e-6, 0.1 * xi_hi);
    double best = -std::numeric_limits<double>::infinity();
    std::array<double, 2> seed{};
    for (int i = 0; i < g; ++i) {
        const double eps = std::exp(std::log(1e-4) + (std::log(0.99) - std::log(1e-4)) * i / (g - 1));
        for (int j = 0; j < g; ++j) {
            const double xi = std::exp(std::log(xi_lo) + (std::log(xi_hi) - std::log(xi_lo)) * j / (g - 1));
            const double w = f(eps, xi);
            if (w > best) {
                best = w;
                seed = {eps, xi};
            }
        }
    }
    return seed;
}

// Nelder-Mead from `seed`, followed by a stationarity check at interior optima.
template <class F>
OptimalPoint refine_optimum(double nbar, F&& f, std::array<double, 2> seed, const OptimizeOptions& opts) {
    const std::array<double, 2> lower{kEpsilonLower, kXiLower};
    const std::array<double, 2> upper = splitter_upper(nbar);
    auto objective = [&](const std::array<double, 2>& v) { return f(v[0], v[1]); };
    auto negated = [&](const std::array<double, 2>& v) { return -f(v[0], v[1]); };

    const std::array<double, 2> step{0.1 * seed[0], 0.1 * seed[1]};
    NelderMeadResult<2> res = nelder_mead(negated, seed, step, lower, upper, opts.simplex);
    if (!res.converged)
        throw ConvergenceError("optimizer: simplex budget exhausted", res.x[0], res.x[1], -res.value);

    double grad = relative_gradient(objective, res.x, -res.value, lower, upper);
    if (grad >= opts.stationarity_tolerance) {
        // polish from the current point with a tighter simplex
        NelderMeadOptions tight = opts.simplex;
        tight.diameter_tolerance *= 1e-2;
        const std::array<double, 2> small{1e-3 * std::max(res.x[0], 1e-6), 1e-3 * std::max(res.x[1], 1e-6)};
        const NelderMeadResult<2> again = nelder_mead(negated, res.x, small, lower, upper, tight);
        if (again.value <= res.value) res = again;
        grad = relative_gradient(objective, res.x, -res.value, lower, upper);
        if (grad >= opts.stationarity_tolerance)
            throw ConvergenceError("optimizer: optimum fails the stationarity check", res.x[0], res.x[1], -res.value);
    }
    return make_point(res.x[0], res.x[1], -res.value);
}

} // namespace detail

/// Maximizes f(epsilon, xi) over (1e-6, 1 - 1e-6) x (0, nbar]: best point of
/// a log-spaced grid, then Nelder-Mead.
template <class F>
OptimalPoint maximize_over_splitter(double nbar, F&& f, const OptimizeOptions& opts = {}) {
    detail::require(nbar > 0.0, "maximize_over_splitter: nbar must be positive");
    return detail::refine_optimum(nbar, f, detail::grid_seed(nbar, f, opts.grid), opts);
}

/// Numerical maximization of the mean net work over (epsilon, xi). In exact
/// mode the grid is scored with the Gaussian closed form, and the quadrature
/// level and outcome lattice are frozen at the seed so that the simplex sees
/// a smooth function of the parameters.
inline OptimalPoint optimize_numeric(double nbar, Mode mode, bool with_unsqueeze = false,
                                     const OptimizeOptions& opts = {}) {
    detail::require(nbar > 0.0, "optimize_numeric: nbar must be positive");
    auto gauss = [nbar](double eps, double xi) { return gaussian_work(nbar, eps, xi); };
    if (mode == Mode::gaussian) return maximize_over_splitter(nbar, gauss, opts);
    if (mode == Mode::low_excitation)
        return maximize_over_splitter(nbar, [nbar](double eps, double xi) { return low_excitation_work(nbar, eps, xi); },
                                      opts);

    const std::array<double, 2> seed = detail::grid_seed(nbar, gauss, opts.grid);
    QuadratureOptions quad = opts.quadrature;
    if (!(quad.fixed_level && quad.fixed_half_width)) {
        const ThermalTable probe = thermal_table(nbar, SplitterConfig::from_tap(seed[0], seed[1]), quad);
        if (!quad.fixed_level) quad.fixed_level = probe.level();
        if (!quad.fixed_half_width) {
            // headroom for the search to move towards a wider outcome spread
            const int widest = lattice_half_width(nbar, SplitterConfig::from_tap(0.5, detail::splitter_upper(nbar)[1]));
            quad.fixed_half_width = std::min(widest, probe.half_width() + probe.half_width() / 2 + 2);
        }
    }
    auto exact = [&](double eps, double xi) {
        return mean_work(nbar, SplitterConfig::from_tap(eps, xi), Mode::exact, with_unsqueeze, quad).w_mean;
    };
    return detail::refine_optimum(nbar, exact, seed, opts);
}

/// The four asymptotic energy flows at the optimum for nbar >> 1.
struct EnergyBudget {
    double e_in = 0.0;
    double e_lo = 0.0;
    double e_det = 0.0;
    double e_rem = 0.0;
    double w = 0.0;
    double residual = 0.0;  // e_in + e_lo - e_det - w - e_rem
    bool asymptotic = true; // false when nbar < 16, where the expansion is poor
};

inline EnergyBudget energy_budget(double nbar) {
    detail::require(nbar > 0.0, "energy_budget: nbar must be positive");
    const double r = std::sqrt(nbar);
    EnergyBudget b;
    b.e_in = nbar;
    b.e_lo = r - 2.5;
    b.e_det = 2.0 * r - 4.0;
    b.e_rem = 2.0 * r - 2.0;
    b.w = nbar - 4.0 * r + 6.0;
    // E_det already contains E_LO, so the printed balance leaves E_LO over
    b.residual = b.e_in + b.e_lo - b.e_det - b.w - b.e_rem;
    b.asymptotic = nbar >= 16.0;
    return b;
}

/// Energy flows at a given configuration, from the chosen work model.
struct EnergyFlows {
    double e_in = 0.0;
    double e_lo = 0.0;
    double e_det = 0.0;      // tapped signal plus both local oscillators
    double w_extracted = 0.0; // work removed by feedforward, before paying for the LO
    double w_net = 0.0;
    double e_rem = 0.0;
    double residual = 0.0;   // e_in + e_lo - e_det - w_extracted - e_rem
};

inline EnergyFlows energy_flows(double nbar, const SplitterConfig& cfg, Mode mode, bool with_unsqueeze = false,
                                const QuadratureOptions& opts = {}) {
    const WorkEstimate est = mean_work(nbar, cfg, mode, with_unsqueeze, opts);
    EnergyFlows f;
    f.e_in = nbar;
    f.e_lo = cfg.lo_energy();
    f.e_det = cfg.epsilon() * nbar + f.e_lo;
    f.w_net = est.w_mean;
    f.w_extracted = est.w_mean + f.e_lo;
    f.e_rem = est.e_rem;
    f.residual = f.e_in + f.e_lo - f.e_det - f.w_extracted - f.e_rem;
    return f;
}

struct RemainderStep {
    double nbar;
    double w;  // optimal work from this remainder, analytic formula
};

/// Feeds the remainder back as a new input: n_k = 2 sqrt(n_{k-1}). Stops once
/// n_k <= 1 + 1e-3 or after max_steps. The map has its fixed point at 4, so
/// a start above 1 approaches 4 and runs for all max_steps.
inline std::vector<RemainderStep> iterate_remainder(double nbar0, int max_steps) {
    detail::require(nbar0 > 1.0, "iterate_remainder: nbar0 must exceed 1");
    detail::require(max_steps >= 0, "iterate_remainder: negative step count");
    std::vector<RemainderStep> steps;
    double n = nbar0;
    for (int k = 1; k <= max_steps; ++k) {
        n = 2.0 * std::sqrt(n);
        steps.push_back({n, w_max_analytic(n).w_max});
        if (n <= 1.0 + 1e-3) break;
    }
    return steps;
}

} // namespace wof
