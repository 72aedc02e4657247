#pragma once

// Photon statistics of the four homodyne detectors: Poisson means for a
// coherent input component, Skellam laws of the count differences, the
// lattice of outcomes, and outcome sampling.

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "wof/bessel.hpp"
#include "wof/error.hpp"

namespace wof {

/// Coherent amplitude alpha = (x + i p) / sqrt(2).
struct CoherentAmplitude {
    double x = 0.0;
    double p = 0.0;
};

/// Transmissivity of the tap beam splitter and the local-oscillator amplitude.
class SplitterConfig {
public:
    SplitterConfig(double kappa, double beta) : kappa_(kappa), beta_(beta) {
        detail::require(kappa > 0.0 && kappa < 1.0, "SplitterConfig: kappa must lie in (0, 1)");
        detail::require(beta >= 0.0 && std::isfinite(beta), "SplitterConfig: beta must be >= 0");
    }

    /// Build from the tapped fraction epsilon = 1 - kappa^2 and xi = 2 beta^2.
    static SplitterConfig from_tap(double epsilon, double xi) {
        detail::require(epsilon > 0.0 && epsilon < 1.0, "SplitterConfig: epsilon must lie in (0, 1)");
        detail::require(xi >= 0.0, "SplitterConfig: xi must be >= 0");
        SplitterConfig cfg(std::sqrt(1.0 - epsilon), std::sqrt(0.5 * xi));
        cfg.epsilon_ = epsilon;
        return cfg;
    }

    double kappa() const noexcept { return kappa_; }
    double beta() const noexcept { return beta_; }
    /// 1 - kappa^2, kept exact when built from_tap.
    double epsilon() const noexcept { return epsilon_ >= 0.0 ? epsilon_ : 1.0 - kappa_ * kappa_; }
    /// Energy drawn by the two local oscillators, 2 beta^2.
    double lo_energy() const noexcept { return 2.0 * beta_ * beta_; }

private:
    double kappa_;
    double beta_;
    double epsilon_ = -1.0;
};

/// Count differences (n+ - n-, n~+ - n~-).
struct Outcome {
    int dnx = 0;
    int dnp = 0;
    friend bool operator==(const Outcome&, const Outcome&) = default;
};

struct DetectorMeans {
    double n_plus;
    double n_minus;
    double nt_plus;
    double nt_minus;
};

/// Poisson means at the four detectors for input component alpha.
/// The p-arm pair uses (1-k^2)/8 [x^2 + (p +- 2b/sqrt(1-k^2))^2], which keeps
/// both means non-negative and gives <dn_p> = sqrt(1-k^2) beta p.
inline DetectorMeans detector_means(CoherentAmplitude alpha, const SplitterConfig& cfg) {
    const double eps = cfg.epsilon();
    const double root = std::sqrt(eps);
    // |gamma_+-|^2 = (1/2)|sqrt(eps)(x + ip)/2 +- beta|^2 with the real LO on the x arm
    const double sx = 0.5 * root * alpha.x;
    const double sp = 0.5 * root * alpha.p;
    const double b = cfg.beta();
    return {
        0.5 * ((sx + b) * (sx + b) + sp * sp),
        0.5 * ((sx - b) * (sx - b) + sp * sp),
        0.5 * (sx * sx + (sp + b) * (sp + b)),
        0.5 * (sx * sx + (sp - b) * (sp - b)),
    };
}

/// Skellam probabilities P(k) for k = -half_width..half_width, index k + half_width.
inline std::vector<double> skellam_row(int half_width, double m1, double m2) {
    detail::require(half_width >= 0, "skellam_row: negative half width");
    detail::require(m1 >= 0.0 && m2 >= 0.0, "skellam_row: negative Poisson mean");
    const int width = 2 * half_width + 1;
    std::vector<double> row(static_cast<std::size_t>(width), 0.0);
    if (m1 == 0.0 && m2 == 0.0) {
        row[half_width] = 1.0;
        return row;
    }
    if (m1 == 0.0 || m2 == 0.0) {
        // one arm dark: a Poisson law on one side
        const double m = m1 > 0.0 ? m1 : m2;
        const int sign = m1 > 0.0 ? 1 : -1;
        const double log_m = std::log(m);
        for (int k = 0; k <= half_width; ++k) {
            row[half_width + sign * k] = std::exp(k * log_m - m - std::lgamma(k + 1.0));
        }
        return row;
    }
    const double log_m1 = std::log(m1);
    const double log_m2 = std::log(m2);
    const double z = 2.0 * std::sqrt(m1 * m2);
    const double gap = std::sqrt(m1) - std::sqrt(m2);
    const double base = -gap * gap;
    const double half_log_ratio = 0.5 * (log_m1 - log_m2);
    const std::vector<double> log_ie = log_scaled_bessel_i(half_width, z, 0.5 * (log_m1 + log_m2));
    for (int k = -half_width; k <= half_width; ++k) {
        row[k + half_width] = std::exp(base + k * half_log_ratio + log_ie[k < 0 ? -k : k]);
    }
    return row;
}

/// Probability that the difference of Poisson(m1) and Poisson(m2) equals dn.
inline double skellam_pmf(int dn, double m1, double m2) {
    detail::require(m1 >= 0.0 && m2 >= 0.0, "skellam_pmf: negative Poisson mean");
    if (m1 == 0.0 && m2 == 0.0) return dn == 0 ? 1.0 : 0.0;
    const int k = dn < 0 ? -dn : dn;
    if (m2 == 0.0) return dn < 0 ? 0.0 : std::exp(dn * std::log(m1) - m1 - std::lgamma(dn + 1.0));
    if (m1 == 0.0) return dn > 0 ? 0.0 : std::exp(k * std::log(m2) - m2 - std::lgamma(k + 1.0));
    const double log_m1 = std::log(m1);
    const double log_m2 = std::log(m2);
    const double gap = std::sqrt(m1) - std::sqrt(m2);
    const double log_ie = log_scaled_bessel_i(k, 2.0 * std::sqrt(m1 * m2), 0.5 * (log_m1 + log_m2)).back();
    return std::exp(-gap * gap + 0.5 * dn * (log_m1 - log_m2) + log_ie);
}

/// P(dnx, dnp | alpha) = P(dnx | alpha) P(dnp | alpha).
inline double outcome_pmf_given_alpha(Outcome out, CoherentAmplitude alpha, const SplitterConfig& cfg) {
    const DetectorMeans m = detector_means(alpha, cfg);
    return skellam_pmf(out.dnx, m.n_plus, m.n_minus) * skellam_pmf(out.dnp, m.nt_plus, m.nt_minus);
}

/// Four independent Poisson draws, returned as the two count differences.
template <class Rng>
Outcome sample_outcome(CoherentAmplitude alpha, const SplitterConfig& cfg, Rng& rng) {
    const DetectorMeans m = detector_means(alpha, cfg);
    auto draw = [&rng](double mean) -> std::int64_t {
        if (mean <= 0.0) return 0;
        return std::poisson_distribution<std::int64_t>(mean)(rng);
    };
    const auto a = draw(m.n_plus);
    const auto b = draw(m.n_minus);
    const auto c = draw(m.nt_plus);
    const auto d = draw(m.nt_minus);
    return {static_cast<int>(a - b), static_cast<int>(c - d)};
}

/// Variance of each count difference under thermal input in the Gaussian
/// picture: beta^2 + nbar (1 - kappa^2)(beta^2 + 1/2).
inline double outcome_variance_thermal(double nbar, const SplitterConfig& cfg) {
    const double b2 = cfg.beta() * cfg.beta();
    return b2 + nbar * cfg.epsilon() * (b2 + 0.5);
}

/// Half width N = ceil(6 sigma) + 4 of the outcome lattice {-N..N}^2.
inline int lattice_half_width(double nbar, const SplitterConfig& cfg) {
    return static_cast<int>(std::ceil(6.0 * std::sqrt(outcome_variance_thermal(nbar, cfg)))) + 4;
}

/// Probability table over the square lattice {-N..N}^2.
class OutcomeDistribution {
public:
    explicit OutcomeDistribution(int half_width)
        : half_width_(half_width), probs_(static_cast<std::size_t>(2 * half_width + 1) * (2 * half_width + 1), 0.0) {
        detail::require(half_width >= 0, "OutcomeDistribution: negative half width");
    }

    int half_width() const noexcept { return half_width_; }
    int width() const noexcept { return 2 * half_width_ + 1; }
    bool contains(Outcome out) const noexcept {
        return std::abs(out.dnx) <= half_width_ && std::abs(out.dnp) <= half_width_;
    }
    std::size_t index(Outcome out) const noexcept {
        return static_cast<std::size_t>(out.dnx + half_width_) * width() + (out.dnp + half_width_);
    }
    double& operator[](Outcome out) { return probs_[index(out)]; }
    double operator[](Outcome out) const { return probs_[index(out)]; }
    double at(Outcome out) const { return contains(out) ? probs_[index(out)] : 0.0; }

    const std::vector<double>& probs() const noexcept { return probs_; }
    std::vector<double>& probs() noexcept { return probs_; }

    double total() const {
        double sum = 0.0;
        for (double v : probs_) sum += v;
        return sum;
    }
    double mean_dnx() const { return moment([](int i, int) { return double(i); }); }
    double mean_dnp() const { return moment([](int, int j) { return double(j); }); }
    double variance_dnx() const {
        const double m = mean_dnx();
        return moment([m](int i, int) { return (i - m) * (i - m); });
    }
    double variance_dnp() const {
        const double m = mean_dnp();
        return moment([m](int, int j) { return (j - m) * (j - m); });
    }

    /// Total-variation distance, treating mass outside either lattice as missing.
    double total_variation(const OutcomeDistribution& other) const {
        const int n = std::max(half_width_, other.half_width_);
        double sum = 0.0;
        for (int i = -n; i <= n; ++i)
            for (int j = -n; j <= n; ++j) sum += std::abs(at({i, j}) - other.at({i, j}));
        sum += std::abs((1.0 - total()) - (1.0 - other.total()));
        return 0.5 * sum;
    }

    void normalize() {
        const double sum = total();
        detail::require(sum > 0.0, "OutcomeDistribution: cannot normalize an empty table");
        for (double& v : probs_) v /= sum;
    }

private:
    template <class F>
    double moment(F f) const {
        double sum = 0.0;
        for (int i = -half_width_; i <= half_width_; ++i)
            for (int j = -half_width_; j <= half_width_; ++j) sum += f(i, j) * (*this)[Outcome{i, j}];
        return sum;
    }

    int half_width_;
    std::vector<double> probs_;
};

} // namespace wof
