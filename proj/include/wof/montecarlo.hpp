#pragma once

// Monte Carlo simulation of the engine at the level of coherent amplitudes.
// Each trial draws the thermal input (and any noise fields) from their
// P-functions, propagates the amplitudes through the splitters, draws
// Poisson photocounts at the four detectors, looks up the feedforward
// displacement for the outcome and books the energy it removes from the
// actual transmitted amplitude.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "wof/engine.hpp"
#include "wof/error.hpp"
#include "wof/feedforward.hpp"
#include "wof/noise.hpp"
#include "wof/parallel.hpp"
#include "wof/photostatistics.hpp"
#include "wof/random.hpp"
#include "wof/thermal_quadrature.hpp"

namespace wof {

/// Target displacement (<x>, <p>) for every outcome of a square lattice.
class FeedforwardTable {
public:
    explicit FeedforwardTable(int half_width)
        : half_width_(half_width), mean_x_(size(), 0.0), mean_p_(size(), 0.0) {
        detail::require(half_width >= 0, "FeedforwardTable: negative half width");
    }

    int half_width() const noexcept { return half_width_; }
    int width() const noexcept { return 2 * half_width_ + 1; }
    bool contains(Outcome out) const noexcept {
        return std::abs(out.dnx) <= half_width_ && std::abs(out.dnp) <= half_width_;
    }
    std::size_t index(Outcome out) const noexcept {
        return static_cast<std::size_t>(out.dnx + half_width_) * width() + (out.dnp + half_width_);
    }
    double mean_x(Outcome out) const { return mean_x_[index(out)]; }
    double mean_p(Outcome out) const { return mean_p_[index(out)]; }
    void set(Outcome out, double mx, double mp) {
        mean_x_[index(out)] = mx;
        mean_p_[index(out)] = mp;
    }

private:
    std::size_t size() const { return static_cast<std::size_t>(width()) * width(); }
    int half_width_;
    std::vector<double> mean_x_;
    std::vector<double> mean_p_;
};

/// Linear feedforward <x> = gain dnx, <p> = gain dnp.
inline FeedforwardTable linear_feedforward(int half_width, double gain) {
    FeedforwardTable t(half_width);
    for (int i = -half_width; i <= half_width; ++i)
        for (int j = -half_width; j <= half_width; ++j) t.set({i, j}, gain * i, gain * j);
    return t;
}

/// Gaussian-approximation displacement kappa x_bar, on the default lattice.
inline FeedforwardTable gaussian_feedforward(double nbar, const SplitterConfig& cfg) {
    return linear_feedforward(lattice_half_width(nbar, cfg), cfg.kappa() * gaussian_estimate_gain(nbar, cfg));
}

/// Linear estimate of the noisy Gaussian model, lattice sized by its spread.
inline FeedforwardTable noisy_feedforward(double nbar, const SplitterConfig& cfg, const NoiseConfig& noise) {
    const double var = noisy_outcome_variance(nbar, cfg, noise);
    const int n = static_cast<int>(std::ceil(6.0 * std::sqrt(var))) + 4;
    return linear_feedforward(n, noisy_feedforward_gain(nbar, cfg, noise));
}

/// Exact conditional means from a quadrature table; improbable outcomes get
/// no displacement.
inline FeedforwardTable exact_feedforward(const ThermalTable& table) {
    const int n = table.half_width();
    FeedforwardTable t(n);
    for (int i = -n; i <= n; ++i) {
        for (int j = -n; j <= n; ++j) {
            if (table.probability({i, j}) < kImprobableThreshold) continue;
            const GaussianMoments m = table.transmitted_moments({i, j});
            t.set({i, j}, m.mean_x(), m.mean_p());
        }
    }
    return t;
}

struct TrialResult {
    Outcome outcome;
    CoherentAmplitude alpha_true;
    double work_extracted = 0.0;  // energy removed from the transmitted amplitude
    double post_energy = 0.0;     // energy left in it
    double table_work = 0.0;      // (<x>^2 + <p>^2)/2 of the looked-up displacement
    double energy_violation = 0.0;
    bool in_lattice = true;
};

struct McSummary {
    std::int64_t n_trials = 0;
    double w_mean = 0.0;         // per-trial ledger, net of 2 beta^2
    double w_stderr = 0.0;
    double w_rms = 0.0;          // spread of the table work
    double w_rms_stderr = 0.0;
    double w_table_mean = 0.0;   // table work, net of 2 beta^2
    double w_table_stderr = 0.0;
    OutcomeDistribution histogram{0};
    std::int64_t out_of_lattice = 0;
    double max_energy_violation = 0.0;
};

struct RunOptions {
    std::int64_t block_size = 4096;
    std::vector<TrialResult>* trials = nullptr;  // per-trial dump when non-null
};

namespace detail {

struct BlockSums {
    double ledger = 0.0, ledger2 = 0.0;
    double t1 = 0.0, t2 = 0.0, t3 = 0.0, t4 = 0.0;
    std::int64_t out_of_lattice = 0;
    double max_violation = 0.0;
    std::vector<std::int64_t> counts;
};

using cplx = std::complex<double>;

template <class Rng>
cplx thermal_amplitude(double occupation, Rng& rng) {
    // P-function of a thermal mode: complex Gaussian with E|a|^2 = occupation
    if (occupation <= 0.0) return {0.0, 0.0};
    std::normal_distribution<double> g(0.0, std::sqrt(0.5 * occupation));
    const double re = g(rng);
    return {re, g(rng)};
}

template <class Rng>
std::int64_t poisson(double mean, Rng& rng) {
    if (mean <= 0.0) return 0;
    return std::poisson_distribution<std::int64_t>(mean)(rng);
}

template <class Rng>
TrialResult simulate_trial(double nbar, const SplitterConfig& cfg, const NoiseConfig& noise,
                           const FeedforwardTable& table, Rng& rng) {
    const double kappa = cfg.kappa();
    const double root_eps = std::sqrt(cfg.epsilon());
    const double kd = std::sqrt(noise.kappa_d2);
    const double leak = std::sqrt(1.0 - noise.kappa_d2);
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);

    TrialResult r;
    std::normal_distribution<double> quad(0.0, std::sqrt(nbar));
    const double x = quad(rng);
    const double p = quad(rng);
    r.alpha_true = {x, p};
    const cplx alpha = cplx(x, p) * inv_sqrt2;
    const cplx tau = thermal_amplitude(noise.n_tau, rng);
    const cplx h = thermal_amplitude(noise.n_h, rng);
    const cplx b1 = cfg.beta() + thermal_amplitude(noise.n_lo, rng);
    const cplx b2 = cplx(0.0, cfg.beta()) + thermal_amplitude(noise.n_lo, rng);

    const cplx transmitted = kappa * alpha + root_eps * tau;
    const cplx tapped = root_eps * alpha - kappa * tau;
    const cplx a1 = (tapped + h) * inv_sqrt2;
    const cplx a2 = (tapped - h) * inv_sqrt2;
    const cplx at_detector[4] = {(a1 + b1) * inv_sqrt2, (a1 - b1) * inv_sqrt2, (a2 + b2) * inv_sqrt2,
                                 (a2 - b2) * inv_sqrt2};

    double input = std::norm(alpha) + std::norm(tau) + std::norm(h);
    double absorbed = 0.0;
    std::int64_t counts[4];
    for (int k = 0; k < 4; ++k) {
        const cplx dark = thermal_amplitude(noise.n_d, rng);
        const cplx seen = kd * at_detector[k] + leak * dark;
        const cplx lost = leak * at_detector[k] - kd * dark;
        input += std::norm(dark);
        absorbed += std::norm(seen) + std::norm(lost);
        counts[k] = poisson(std::norm(seen), rng);
    }
    r.outcome = {static_cast<int>(counts[0] - counts[1]), static_cast<int>(counts[2] - counts[3])};

    const double tx = std::sqrt(2.0) * transmitted.real();
    const double tp = std::sqrt(2.0) * transmitted.imag();
    double mx = 0.0;
    double mp = 0.0;
    if (table.contains(r.outcome)) {
        mx = table.mean_x(r.outcome);
        mp = table.mean_p(r.outcome);
    } else {
        r.in_lattice = false;
    }
    r.table_work = 0.5 * (mx * mx + mp * mp);
    r.work_extracted = tx * mx + tp * mp - r.table_work;
    r.post_energy = 0.5 * ((tx - mx) * (tx - mx) + (tp - mp) * (tp - mp));

    const double lo = std::norm(b1) + std::norm(b2);
    const double balance = input + lo - absorbed - r.work_extracted - r.post_energy;
    r.energy_violation = std::abs(balance) / std::max(1.0, input + lo);
    return r;
}

} // namespace detail

/// Runs n_trials independent trials; trial i draws from stream i of `seed`.
/// Block sums are reduced in block order, so the result does not depend on
/// the thread count.
inline McSummary run_trials(double nbar, const SplitterConfig& cfg, const NoiseConfig& noise,
                            const FeedforwardTable& table, std::int64_t n_trials, std::uint64_t seed,
                            const RunOptions& opts = {}) {
    detail::require(nbar > 0.0, "run_trials: nbar must be positive");
    detail::require(n_trials >= 1, "run_trials: need at least one trial");
    detail::require(opts.block_size >= 1, "run_trials: block size must be positive");
    noise.validate();
    if (opts.trials) opts.trials->assign(static_cast<std::size_t>(n_trials), TrialResult{});

    const std::int64_t n_blocks = (n_trials + opts.block_size - 1) / opts.block_size;
    const std::size_t cells = static_cast<std::size_t>(table.width()) * table.width();
    std::vector<detail::BlockSums> blocks(static_cast<std::size_t>(n_blocks));

    parallel_for(static_cast<std::size_t>(n_blocks), [&](std::size_t b) {
        detail::BlockSums& s = blocks[b];
        s.counts.assign(cells, 0);
        const std::int64_t first = static_cast<std::int64_t>(b) * opts.block_size;
        const std::int64_t last = std::min(n_trials, first + opts.block_size);
        for (std::int64_t i = first; i < last; ++i) {
            Philox4x32 rng(seed, static_cast<std::uint64_t>(i));
            const TrialResult r = detail::simulate_trial(nbar, cfg, noise, table, rng);
            s.ledger += r.work_extracted;
            s.ledger2 += r.work_extracted * r.work_extracted;
            const double t = r.table_work;
            s.t1 += t;
            s.t2 += t * t;
            s.t3 += t * t * t;
            s.t4 += t * t * t * t;
            if (r.in_lattice)
                ++s.counts[table.index(r.outcome)];
            else
                ++s.out_of_lattice;
            s.max_violation = std::max(s.max_violation, r.energy_violation);
            if (opts.trials) (*opts.trials)[static_cast<std::size_t>(i)] = r;
        }
    });

    detail::BlockSums total;
    total.counts.assign(cells, 0);
    for (const auto& s : blocks) {
        total.ledger += s.ledger;
        total.ledger2 += s.ledger2;
        total.t1 += s.t1;
        total.t2 += s.t2;
        total.t3 += s.t3;
        total.t4 += s.t4;
        total.out_of_lattice += s.out_of_lattice;
        total.max_violation = std::max(total.max_violation, s.max_violation);
        for (std::size_t c = 0; c < cells; ++c) total.counts[c] += s.counts[c];
    }

    const double n = static_cast<double>(n_trials);
    const double lo = cfg.lo_energy();
    McSummary out;
    out.n_trials = n_trials;

    const double lmean = total.ledger / n;
    const double lvar = std::max(total.ledger2 / n - lmean * lmean, 0.0);
    out.w_mean = lmean - lo;
    out.w_stderr = n > 1 ? std::sqrt(lvar / (n - 1)) : 0.0;

    const double m = total.t1 / n;
    const double e2 = total.t2 / n;
    const double var = std::max(e2 - m * m, 0.0);
    const double mu4 = total.t4 / n - 4.0 * m * total.t3 / n + 6.0 * m * m * e2 - 3.0 * m * m * m * m;
    out.w_table_mean = m - lo;
    out.w_table_stderr = n > 1 ? std::sqrt(var / (n - 1)) : 0.0;
    out.w_rms = std::sqrt(var);
    // delta method: Var(s) ~ (mu4 - sigma^4) / (4 n sigma^2)
    out.w_rms_stderr = var > 0.0 && n > 1 ? std::sqrt(std::max(mu4 - var * var, 0.0) / (4.0 * (n - 1) * var)) : 0.0;

    out.histogram = OutcomeDistribution(table.half_width());
    for (std::size_t c = 0; c < cells; ++c) out.histogram.probs()[c] = static_cast<double>(total.counts[c]) / n;
    out.out_of_lattice = total.out_of_lattice;
    out.max_energy_violation = total.max_violation;
    return out;
}

enum class ValidationTarget { mean_work_gaussian, work_with_noise, w_rms_identity };

inline const char* to_string(ValidationTarget t) {
    switch (t) {
    case ValidationTarget::mean_work_gaussian: return "mean_work_gaussian";
    case ValidationTarget::work_with_noise: return "work_with_noise";
    case ValidationTarget::w_rms_identity: return "w_rms_identity";
    }
    return "?";
}

struct ValidationParams {
    double nbar;
    SplitterConfig cfg;
    NoiseConfig noise{};
};

struct ValidationReport {
    ValidationTarget target;
    double estimate = 0.0;
    double analytic = 0.0;
    double stderr_ = 0.0;
    double z_score = 0.0;
    double rel_dev = 0.0;
    bool pass = false;
    McSummary summary;
};

/// Checks a closed form against simulation: passes iff |z| < 3 and the
/// relative deviation is below 5%.
inline ValidationReport validate_formula(ValidationTarget target, const ValidationParams& params,
                                         std::int64_t n_trials, std::uint64_t seed) {
    ValidationReport rep;
    rep.target = target;
    const double nbar = params.nbar;
    const SplitterConfig& cfg = params.cfg;
    switch (target) {
    case ValidationTarget::mean_work_gaussian:
        rep.summary = run_trials(nbar, cfg, NoiseConfig::ideal(), gaussian_feedforward(nbar, cfg), n_trials, seed);
        rep.estimate = rep.summary.w_mean;
        rep.stderr_ = rep.summary.w_stderr;
        rep.analytic = mean_work(nbar, cfg, Mode::gaussian).w_mean;
        break;
    case ValidationTarget::work_with_noise:
        rep.summary = run_trials(nbar, cfg, params.noise, noisy_feedforward(nbar, cfg, params.noise), n_trials, seed);
        rep.estimate = rep.summary.w_mean;
        rep.stderr_ = rep.summary.w_stderr;
        rep.analytic = work_with_noise(nbar, cfg, params.noise);
        break;
    case ValidationTarget::w_rms_identity:
        rep.summary = run_trials(nbar, cfg, NoiseConfig::ideal(), gaussian_feedforward(nbar, cfg), n_trials, seed);
        rep.estimate = rep.summary.w_rms;
        rep.stderr_ = rep.summary.w_rms_stderr;
        rep.analytic = mean_work(nbar, cfg, Mode::gaussian).w_mean + cfg.lo_energy();
        break;
    }
    const double diff = rep.estimate - rep.analytic;
    rep.z_score = rep.stderr_ > 0.0 ? diff / rep.stderr_ : (diff == 0.0 ? 0.0 : INFINITY);
    rep.rel_dev = rep.analytic != 0.0 ? std::abs(diff / rep.analytic) : std::abs(diff);
    rep.pass = std::abs(rep.z_score) < 3.0 && rep.rel_dev < 0.05;
    return rep;
}

} // namespace wof
