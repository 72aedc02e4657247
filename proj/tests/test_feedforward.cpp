#include <gtest/gtest.h>

#include <cmath>

#include "wof/engine.hpp"
#include "wof/feedforward.hpp"

using namespace wof;

namespace {

struct CartesianMoments {
    double mass = 0, x = 0, p = 0;
};

// midpoint rule over a box of +-8 sigma
template <class F>
CartesianMoments integrate(F density, double nbar, int m = 500) {
    const double lim = 8.0 * std::sqrt(nbar);
    const double h = 2.0 * lim / m;
    CartesianMoments r;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            const double x = -lim + (i + 0.5) * h, p = -lim + (j + 0.5) * h;
            const double w = density(x, p) * h * h;
            r.mass += w;
            r.x += w * x;
            r.p += w * p;
        }
    return r;
}

} // namespace

TEST(Posterior, NormalizedAndPointwiseBayes) {
    const double nbar = 1.55;
    const SplitterConfig cfg(0.9424, 0.113);
    const ThermalTable table = thermal_table(nbar, cfg);
    for (Outcome out : {Outcome{0, 0}, Outcome{1, 0}, Outcome{-1, 2}}) {
        const Posterior post = posterior(out, table);
        EXPECT_EQ(post.outcome(), out);
        EXPECT_NEAR(integrate(post, nbar).mass, 1.0, 1e-6);
        for (auto [x, p] : {std::pair{0.3, -1.2}, {2.0, 0.5}, {-1.0, -1.0}}) {
            const double expect =
                outcome_pmf_given_alpha(out, {x, p}, cfg) * thermal_density(nbar, x, p) / table.probability(out);
            EXPECT_NEAR(post(x, p), expect, 1e-15 * expect);
            EXPECT_GE(post(x, p), 0.0);
        }
    }
}

TEST(Posterior, Symmetries) {
    const double nbar = 4.0;
    const SplitterConfig cfg(0.9, 0.6);
    const Posterior centre = posterior({0, 0}, nbar, cfg);
    for (auto [x, p] : {std::pair{0.7, 1.9}, {-2.5, 0.4}}) {
        EXPECT_NEAR(centre(x, p), centre(-x, p), 1e-14 * centre(x, p));
        EXPECT_NEAR(centre(x, p), centre(p, x), 1e-14 * centre(x, p));
        EXPECT_NEAR(centre(x, p), centre(-x, -p), 1e-14 * centre(x, p));
    }
    const auto c = integrate(centre, nbar);
    EXPECT_NEAR(c.x, 0.0, 1e-12);
    EXPECT_NEAR(c.p, 0.0, 1e-12);

    const Posterior shifted = posterior({3, 0}, nbar, cfg);
    EXPECT_NEAR(shifted(1.0, 0.8), shifted(1.0, -0.8), 1e-14 * shifted(1.0, 0.8));
    EXPECT_NEAR(integrate(shifted, nbar).p, 0.0, 1e-12);
}

// Dominant lobe on +x. A weak LO barely fixes the sign of x, so a smaller
// mirror lobe sits on -x, cut off by the node where the + port is dark.
TEST(Posterior, LowExcitationOutcomeFavoursPositiveX) {
    const double nbar = 1.55, k = 0.9424, b = 0.113;
    const SplitterConfig cfg(k, b);
    const Posterior post = posterior({1, 0}, nbar, cfg);
    double best = -1, bx = 0, by = 0;
    for (double x = -6; x <= 6; x += 0.02)
        for (double p = -6; p <= 6; p += 0.02)
            if (post(x, p) > best) best = post(x, p), bx = x, by = p;
    EXPECT_GT(bx, 0.5);
    EXPECT_NEAR(by, 0.0, 0.011);
    const double node = -2.0 * b / std::sqrt(cfg.epsilon());
    EXPECT_LT(post(node, 0.0), 1e-12 * best);
    double mirror = 0.0;
    for (double x = -6; x < node; x += 0.01) mirror = std::max(mirror, post(x, 0.0));
    EXPECT_GT(mirror, 0.0);
    EXPECT_LT(mirror, 0.25 * best);
    EXPECT_GT(integrate(post, nbar).x, 0.0);
}

TEST(Posterior, Errors) {
    const SplitterConfig cfg(0.9, 0.01);
    EXPECT_THROW(posterior({1000, 0}, 1.0, cfg), InvalidArgument);
    QuadratureOptions wide;
    wide.fixed_half_width = 200;
    wide.fixed_level = 0;
    try {
        (void)posterior({200, 200}, 1e-6, cfg, wide);
        FAIL() << "expected ImprobableOutcome";
    } catch (const ImprobableOutcome& e) {
        EXPECT_LT(e.probability(), 1e-300);
    }
}

TEST(Posterior, BayesConsistencyRecoversPrior) {
    const double nbar = 3.0;
    const SplitterConfig cfg(0.9, 0.7);
    const ThermalTable table = thermal_table(nbar, cfg);
    const int n = table.half_width();
    for (double x : {-3.0, -1.0, 0.0, 1.5, 4.0})
        for (double p : {-2.0, 0.0, 2.5}) {
            double s = 0.0;
            for (int i = -n; i <= n; ++i)
                for (int j = -n; j <= n; ++j) {
                    const double prob = table.probability({i, j});
                    if (prob < kImprobableThreshold) continue;
                    s += prob * posterior({i, j}, table)(x, p);
                }
            const double prior = thermal_density(nbar, x, p);
            EXPECT_NEAR(s, prior, 1e-4 * prior);
        }
}

TEST(ConditionalState, CentreOutcomeHasZeroMeans) {
    for (Mode mode : {Mode::exact, Mode::gaussian}) {
        const auto s = conditional_state({0, 0}, 10.0, {0.902, 0.78}, mode);
        EXPECT_NEAR(s.moments.mean_x(), 0.0, 1e-12);
        EXPECT_NEAR(s.moments.mean_p(), 0.0, 1e-12);
    }
}

TEST(ConditionalState, GaussianFormulaAndExactCrossCheck) {
    const double nbar = 10.0, k = 0.902, b = 0.78;
    const double eps = 1 - k * k;
    const double xbar = 1.0 / (b * std::sqrt(eps) * (1 + 1 / (nbar * eps) + 1 / (2 * b * b)));
    const auto g = conditional_state({1, 0}, nbar, {k, b}, Mode::gaussian);
    EXPECT_NEAR(g.moments.mean_x(), k * xbar, 1e-12);
    EXPECT_EQ(g.moments.mean_p(), 0.0);
    const double sx2 = nbar / (1 + 2 * b * b * nbar * eps / (2 * b * b + nbar * eps));
    EXPECT_NEAR(g.moments.v11(), k * k * sx2 + 0.5, 1e-12);
    EXPECT_EQ(g.moments.v11(), g.moments.v22());
    EXPECT_EQ(g.moments.v12(), 0.0);
    // the exact estimate is not linear in the counts; frozen from the
    // quadrature validated against the Cartesian rule below
    const auto e = conditional_state({1, 0}, nbar, {k, b}, Mode::exact);
    EXPECT_NEAR(e.moments.mean_x(), 1.337762, 1e-5);
    EXPECT_GT(e.moments.mean_x(), g.moments.mean_x());
}

// exact posterior means against a brute-force Cartesian integration
TEST(ConditionalState, ExactMeansMatchCartesianQuadrature) {
    const double nbar = 2.0;
    const SplitterConfig cfg(0.92, 0.4);
    for (Outcome out : {Outcome{1, 0}, Outcome{2, -1}, Outcome{0, 3}}) {
        const Posterior post = posterior(out, nbar, cfg);
        const auto c = integrate(post, nbar, 700);
        const auto s = conditional_state(out, nbar, cfg, Mode::exact);
        EXPECT_NEAR(s.moments.mean_x(), cfg.kappa() * c.x / c.mass, 1e-7);
        EXPECT_NEAR(s.moments.mean_p(), cfg.kappa() * c.p / c.mass, 1e-7);
    }
}

// Outcome by outcome the linear estimate is off by 10-15% rms, but the
// mean squared displacement, which sets the work, agrees closely.
TEST(ConditionalState, ExactAndGaussianMeansAgreeOnAverage) {
    for (double nbar : {5.0, 10.0, 50.0}) {
        const OptimalPoint opt = w_max_analytic(nbar);
        const SplitterConfig cfg(opt.kappa, opt.beta);
        const ThermalTable table = thermal_table(nbar, cfg);
        const int n = table.half_width();
        double diff = 0.0, gauss = 0.0, exact = 0.0;
        for (int i = -n; i <= n; ++i)
            for (int j = -n; j <= n; ++j) {
                const double prob = table.probability({i, j});
                if (prob < kImprobableThreshold) continue;
                const auto e = conditional_state({i, j}, table).moments;
                const auto g = conditional_state_gaussian({i, j}, nbar, cfg).moments;
                diff += prob * (std::pow(e.mean_x() - g.mean_x(), 2) + std::pow(e.mean_p() - g.mean_p(), 2));
                gauss += prob * (g.mean_x() * g.mean_x() + g.mean_p() * g.mean_p());
                exact += prob * (e.mean_x() * e.mean_x() + e.mean_p() * e.mean_p());
            }
        EXPECT_NEAR(std::sqrt(exact / gauss), 1.0, 0.03) << nbar;
        EXPECT_LT(std::sqrt(diff / gauss), 0.2) << nbar;
    }
}

TEST(ConditionalState, VacuumFloor) {
    const ThermalTable table = thermal_table(10.0, {0.902, 0.78});
    const int n = table.half_width();
    for (int i = -n; i <= n; ++i)
        for (int j = -n; j <= n; ++j) {
            if (table.probability({i, j}) < 1e-200) continue;
            const auto s = conditional_state({i, j}, table);
            EXPECT_GE(s.moments.v11(), 0.5);
            EXPECT_GE(s.moments.v22(), 0.5);
        }
    const auto g = conditional_state({3, 1}, 10.0, {0.902, 0.78}, Mode::gaussian);
    EXPECT_GE(g.moments.v11(), 0.5);
}

TEST(OutcomeWork, Examples) {
    const SplitterConfig cfg(0.902, 0.78);
    EXPECT_NEAR(outcome_work({0, 0}, 10.0, cfg, Mode::gaussian, false), 0.0, 1e-15);
    EXPECT_NEAR(outcome_work({0, 0}, 10.0, cfg, Mode::exact, false), 0.0, 1e-12);

    const double g = cfg.kappa() * gaussian_estimate_gain(10.0, cfg);
    for (Outcome o : {Outcome{1, 0}, Outcome{2, -3}, Outcome{-4, 1}})
        EXPECT_NEAR(outcome_work(o, 10.0, cfg, Mode::gaussian, false),
                    0.5 * g * g * (o.dnx * o.dnx + o.dnp * o.dnp), 1e-12);

    EXPECT_EQ(outcome_work({2, 1}, 10.0, cfg, Mode::gaussian, true),
              outcome_work({2, 1}, 10.0, cfg, Mode::gaussian, false));
    const ThermalTable table = thermal_table(10.0, cfg);
    for (Outcome o : {Outcome{1, 0}, Outcome{2, 1}, Outcome{0, -3}}) {
        const auto s = conditional_state(o, table);
        EXPECT_GT(outcome_work(s, true), outcome_work(s, false));
    }
}

TEST(OutcomeWork, Isotropy) {
    const SplitterConfig cfg(0.902, 0.78);
    // gaussian mode: depends on dnx^2 + dnp^2 only
    EXPECT_EQ(outcome_work({3, 4}, 10.0, cfg, Mode::gaussian, false),
              outcome_work({5, 0}, 10.0, cfg, Mode::gaussian, false));
    const ThermalTable table = thermal_table(10.0, cfg);
    auto w = [&](Outcome o) { return outcome_work(conditional_state(o, table), true); };
    for (Outcome o : {Outcome{1, 0}, Outcome{2, -1}, Outcome{3, 2}, Outcome{-4, 1}}) {
        const double base = w(o);
        EXPECT_NEAR(w({-o.dnx, -o.dnp}), base, 1e-6 * base);
        EXPECT_NEAR(w({o.dnp, o.dnx}), base, 1e-6 * base);
    }
}

TEST(OutcomeWork, TableRowsMatchPointEvaluation) {
    const SplitterConfig cfg(0.9424, 0.113);
    const auto rows = outcome_work_table(1.55, cfg, Mode::exact);
    double total = 0.0;
    for (const auto& r : rows) {
        total += r.prob;
        EXPECT_GE(r.w_displacement, 0.0);
        EXPECT_GE(r.w_unsqueeze, 0.0);
    }
    EXPECT_NEAR(total, 1.0, 1e-6);
    for (const auto& r : rows)
        if (r.outcome == Outcome{1, 0})
            EXPECT_NEAR(r.w_displacement, outcome_work({1, 0}, 1.55, cfg, Mode::exact, false), 1e-14);
}
