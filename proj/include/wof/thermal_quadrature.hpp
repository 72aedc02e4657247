#pragma once

// Exact outcome statistics for thermal input. The outcome probabilities and
// the first and second P-function moments of every conditional posterior are
// integrals of the Skellam product against the thermal Gaussian P-function:
//
//   T_m(dnx, dnp) = int m(x, p) P(dnx, dnp | x, p) P_th(x, p) dx dp,
//   m in {1, x, p, x^2, p^2, x p}.
//
// The integral runs in polar coordinates with r = sqrt(2 nbar) t,
// t in [0, 6] (|alpha|^2 <= 36 nbar), composite Gauss-Legendre in t and
// Gauss-Legendre in angle. Only the first quadrant is integrated: reflecting
// x -> -x swaps the two x-arm means, i.e. maps dnx -> -dnx, so the other
// three quadrants are recovered by index reflection with moment signs.
// All six tables are filled for all outcomes in one pass, as a single
// matrix product per chunk of nodes.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

#include "wof/error.hpp"
#include "wof/parallel.hpp"
#include "wof/phase_space.hpp"
#include "wof/photostatistics.hpp"
#include "wof/quadrature.hpp"

namespace wof {

enum class Mode { exact, gaussian, low_excitation };

inline const char* to_string(Mode mode) {
    switch (mode) {
    case Mode::exact: return "exact";
    case Mode::gaussian: return "gaussian";
    case Mode::low_excitation: return "low_excitation";
    }
    return "?";
}

struct QuadratureOptions {
    double tolerance = 1e-6;         // relative change between successive refinements
    int max_level = 4;               // each level doubles angular and radial nodes
    double truncation_tolerance = 1e-6;
    std::optional<int> fixed_level;  // skip adaptivity, use exactly this level
    std::optional<int> fixed_half_width;
};

namespace detail {
inline constexpr int kAngularChunks = 16;  // angular nodes per quadrant at level 0
inline constexpr int kRadialPanels = 12;
inline constexpr int kPanelOrder = 8;
inline constexpr double kRadialCutoff = 6.0;  // t_max, |alpha|^2 = nbar t^2
} // namespace detail

/// Raw posterior moments for every lattice outcome.
class ThermalTable {
public:
    ThermalTable(double nbar, const SplitterConfig& cfg, int half_width, int level)
        : nbar_(nbar), cfg_(cfg), half_width_(half_width), level_(level) {
        const std::size_t n = static_cast<std::size_t>(width()) * width();
        for (auto& t : tables_) t.assign(n, 0.0);
    }

    enum Moment { one = 0, x = 1, p = 2, xx = 3, pp = 4, xp = 5 };

    double nbar() const noexcept { return nbar_; }
    const SplitterConfig& config() const noexcept { return cfg_; }
    int half_width() const noexcept { return half_width_; }
    int width() const noexcept { return 2 * half_width_ + 1; }
    int level() const noexcept { return level_; }
    bool contains(Outcome out) const noexcept {
        return std::abs(out.dnx) <= half_width_ && std::abs(out.dnp) <= half_width_;
    }
    std::size_t index(Outcome out) const noexcept {
        return static_cast<std::size_t>(out.dnx + half_width_) * width() + (out.dnp + half_width_);
    }

    double raw(Moment m, Outcome out) const { return tables_[m][index(out)]; }
    std::vector<double>& table(Moment m) { return tables_[m]; }
    const std::vector<double>& table(Moment m) const { return tables_[m]; }

    double probability(Outcome out) const { return contains(out) ? tables_[one][index(out)] : 0.0; }

    double total_probability() const {
        double s = 0.0;
        for (double v : tables_[one]) s += v;
        return s;
    }
    /// Probability mass that falls outside the lattice.
    double truncation_residual() const { return 1.0 - total_probability(); }

    /// Moments of the transmitted (kappa-scaled) mode given `out`, with the
    /// vacuum half quantum added to the variances.
    GaussianMoments transmitted_moments(Outcome out) const {
        const std::size_t k = index(out);
        const double prob = tables_[one][k];
        if (!(prob > 0.0)) throw ImprobableOutcome("outcome has zero probability on the quadrature grid", prob);
        const double kappa = cfg_.kappa();
        const double k2 = kappa * kappa;
        const double mx = tables_[x][k] / prob;
        const double mp = tables_[p][k] / prob;
        const double cxx = std::max(tables_[xx][k] / prob - mx * mx, 0.0);
        const double cpp = std::max(tables_[pp][k] / prob - mp * mp, 0.0);
        double cxp = tables_[xp][k] / prob - mx * mp;
        // a P-function covariance is positive semidefinite; clip rounding excursions
        const double bound = std::sqrt(cxx * cpp);
        cxp = std::clamp(cxp, -bound, bound);
        return {kappa * mx, kappa * mp, k2 * cxx + 0.5, k2 * cpp + 0.5, k2 * cxp};
    }

    void set_change(double change) { change_ = change; }
    /// Relative change against the previous refinement level (0 when fixed).
    double quadrature_change() const noexcept { return change_; }

private:
    double nbar_;
    SplitterConfig cfg_;
    int half_width_;
    int level_;
    double change_ = 0.0;
    std::vector<double> tables_[6];
};

/// Lattice sums used to judge quadrature convergence.
struct TableSummary {
    double total = 0.0;          // sum of probabilities
    double gross_work = 0.0;     // sum_out P W_displacement(out)
    double unsqueeze_work = 0.0; // sum_out P W_US(out)
    double work_second_moment = 0.0;
    double unsqueeze_second_moment = 0.0;
    double cross_moment = 0.0;   // sum_out P W_d W_US
};

inline TableSummary summarize(const ThermalTable& table) {
    TableSummary s;
    const int n = table.half_width();
    for (int i = -n; i <= n; ++i) {
        for (int j = -n; j <= n; ++j) {
            const Outcome out{i, j};
            const double prob = table.probability(out);
            s.total += prob;
            if (!(prob > 1e-300)) continue;
            const GaussianMoments m = table.transmitted_moments(out);
            const double wd = displacement_work(m);
            const double wu = unsqueeze_work(m);
            s.gross_work += prob * wd;
            s.unsqueeze_work += prob * wu;
            s.work_second_moment += prob * wd * wd;
            s.unsqueeze_second_moment += prob * wu * wu;
            s.cross_moment += prob * wd * wu;
        }
    }
    return s;
}

namespace detail {

inline ThermalTable integrate_thermal(double nbar, const SplitterConfig& cfg, int half_width, int level) {
    const int width = 2 * half_width + 1;
    const int rays_per_chunk = 1 << level;
    const int angular = kAngularChunks * rays_per_chunk;
    const QuadratureRule theta = gauss_legendre(angular, 0.0, 0.5 * std::numbers::pi);
    const QuadratureRule radial = composite_gauss_legendre(kRadialPanels << level, kPanelOrder, 0.0, kRadialCutoff);
    const double scale = std::sqrt(2.0 * nbar);
    const int n_radial = static_cast<int>(radial.nodes.size());
    const int chunk_nodes = rays_per_chunk * n_radial;

    // Per-chunk quadrant sums, stacked as 6 blocks of width x width.
    std::vector<Eigen::MatrixXd> partial(kAngularChunks);

    parallel_for(kAngularChunks, [&](std::size_t chunk) {
        Eigen::MatrixXd lhs(6 * width, chunk_nodes);
        Eigen::MatrixXd rhs(width, chunk_nodes);
        int col = 0;
        for (int a = 0; a < rays_per_chunk; ++a) {
            const int ray = static_cast<int>(chunk) * rays_per_chunk + a;
            const double c = std::cos(theta.nodes[ray]);
            const double s = std::sin(theta.nodes[ray]);
            for (int r = 0; r < n_radial; ++r, ++col) {
                const double t = radial.nodes[r];
                // thermal weight: (1/pi) t exp(-t^2) dt dtheta
                const double w = theta.weights[ray] * radial.weights[r] * t * std::exp(-t * t) / std::numbers::pi;
                const double xv = scale * t * c;
                const double pv = scale * t * s;
                const DetectorMeans m = detector_means({xv, pv}, cfg);
                const std::vector<double> sx = skellam_row(half_width, m.n_plus, m.n_minus);
                const std::vector<double> sp = skellam_row(half_width, m.nt_plus, m.nt_minus);
                const double moments[6] = {w, w * xv, w * pv, w * xv * xv, w * pv * pv, w * xv * pv};
                for (int b = 0; b < 6; ++b)
                    for (int i = 0; i < width; ++i) lhs(b * width + i, col) = moments[b] * sx[i];
                for (int j = 0; j < width; ++j) rhs(j, col) = sp[j];
            }
        }
        partial[chunk].noalias() = lhs * rhs.transpose();
    });

    Eigen::MatrixXd quadrant = Eigen::MatrixXd::Zero(6 * width, width);
    for (const auto& part : partial) quadrant += part;

    ThermalTable table(nbar, cfg, half_width, level);
    // parity of each moment under x -> -x and p -> -p
    constexpr int sign_x[6] = {1, -1, 1, 1, 1, -1};
    constexpr int sign_p[6] = {1, 1, -1, 1, 1, -1};
    for (int b = 0; b < 6; ++b) {
        auto& dst = table.table(static_cast<ThermalTable::Moment>(b));
        for (int i = -half_width; i <= half_width; ++i) {
            for (int j = -half_width; j <= half_width; ++j) {
                auto q = [&](int ii, int jj) { return quadrant(b * width + ii + half_width, jj + half_width); };
                const double v = q(i, j) + sign_x[b] * q(-i, j) + sign_p[b] * q(i, -j) +
                                 sign_x[b] * sign_p[b] * q(-i, -j);
                dst[static_cast<std::size_t>(i + half_width) * width + (j + half_width)] = v;
            }
        }
    }
    return table;
}

inline double relative_change(const TableSummary& a, const TableSummary& b) {
    const double scale = std::max(std::abs(b.gross_work), 1e-8);
    return std::max({std::abs(a.total - b.total), std::abs(a.gross_work - b.gross_work) / scale,
                     std::abs(a.unsqueeze_work - b.unsqueeze_work) / scale});
}

} // namespace detail

/// Exact outcome table by adaptive quadrature. Throws QuadratureError if the
/// grid does not settle or the lattice misses more than the allowed mass.
inline ThermalTable thermal_table(double nbar, const SplitterConfig& cfg, const QuadratureOptions& opts = {}) {
    detail::require(nbar > 0.0, "thermal_table: nbar must be positive");
    int half_width = opts.fixed_half_width.value_or(lattice_half_width(nbar, cfg));

    auto solve = [&](int n) {
        if (opts.fixed_level) return detail::integrate_thermal(nbar, cfg, n, *opts.fixed_level);
        ThermalTable coarse = detail::integrate_thermal(nbar, cfg, n, 0);
        TableSummary coarse_sum = summarize(coarse);
        for (int level = 1; level <= opts.max_level; ++level) {
            ThermalTable fine = detail::integrate_thermal(nbar, cfg, n, level);
            const TableSummary fine_sum = summarize(fine);
            const double change = detail::relative_change(coarse_sum, fine_sum);
            fine.set_change(change);
            if (change < opts.tolerance) return fine;
            if (level == opts.max_level)
                throw QuadratureError("thermal quadrature did not converge", change);
            coarse = std::move(fine);
            coarse_sum = fine_sum;
        }
        return coarse;
    };

    ThermalTable table = solve(half_width);
    if (!opts.fixed_half_width && table.truncation_residual() > opts.truncation_tolerance) {
        // exact tails are closer to exponential than Gaussian, so the
        // single retry doubles the lattice
        half_width *= 2;
        table = solve(half_width);
        if (table.truncation_residual() > opts.truncation_tolerance)
            throw QuadratureError("outcome lattice truncation residual too large", table.truncation_residual());
    }
    return table;
}

/// Outcome distribution for thermal input with mean occupation nbar.
/// exact: quadrature of the Skellam product against the thermal P-function.
/// gaussian: closed-form Gaussian of variance beta^2 + nbar(1-k^2)(beta^2 + 1/2)
/// evaluated on the lattice and renormalized.
inline OutcomeDistribution outcome_distribution_thermal(double nbar, const SplitterConfig& cfg, Mode mode,
                                                        const QuadratureOptions& opts = {}) {
    detail::require(nbar > 0.0, "outcome_distribution_thermal: nbar must be positive");
    if (mode == Mode::exact) {
        const ThermalTable table = thermal_table(nbar, cfg, opts);
        OutcomeDistribution dist(table.half_width());
        dist.probs() = table.table(ThermalTable::one);
        return dist;
    }
    detail::require(mode == Mode::gaussian, "outcome_distribution_thermal: mode must be exact or gaussian");
    const int n = opts.fixed_half_width.value_or(lattice_half_width(nbar, cfg));
    const double var = outcome_variance_thermal(nbar, cfg);
    OutcomeDistribution dist(n);
    for (int i = -n; i <= n; ++i)
        for (int j = -n; j <= n; ++j) dist[{i, j}] = std::exp(-(double(i) * i + double(j) * j) / (2.0 * var));
    dist.normalize();
    return dist;
}

} // namespace wof
