#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <random>
#include <set>

#include "wof/montecarlo.hpp"
#include "wof/thermo.hpp"

using namespace wof;

namespace {

constexpr std::uint64_t kSeed = 20240601;

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

} // namespace

// Known-answer vectors of the Random123 reference implementation.
TEST(Philox, KnownAnswers) {
    using C = Philox4x32::Counter;
    using K = Philox4x32::Key;
    EXPECT_EQ(Philox4x32::bijection(C{0, 0, 0, 0}, K{0, 0}), (C{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
    EXPECT_EQ(Philox4x32::bijection(C{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, K{0xffffffff, 0xffffffff}),
              (C{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
    EXPECT_EQ(Philox4x32::bijection(C{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, K{0xa4093822, 0x299f31d0}),
              (C{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(Philox, StreamsAreReproducibleAndDistinct) {
    Philox4x32 a(5, 0), b(5, 0), c(5, 1), d(6, 0);
    std::set<std::uint32_t> firsts;
    for (int i = 0; i < 100; ++i) {
        const auto x = a();
        EXPECT_EQ(x, b());
        firsts.insert(x);
    }
    Philox4x32 a2(5, 0);
    int same_c = 0, same_d = 0;
    for (int i = 0; i < 100; ++i) {
        const auto x = a2();
        same_c += x == c();
        same_d += x == d();
    }
    EXPECT_LT(same_c, 3);
    EXPECT_LT(same_d, 3);
    EXPECT_GT(firsts.size(), 95u);
}

TEST(Philox, UniformMoments) {
    Philox4x32 rng(kSeed, 3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double s = 0, s2 = 0;
    const int n = 1000000;
    for (int i = 0; i < n; ++i) {
        const double x = u(rng);
        s += x;
        s2 += x * x;
    }
    EXPECT_NEAR(s / n, 0.5, 3.0 * std::sqrt(1.0 / 12.0 / n));
    EXPECT_NEAR(s2 / n - (s / n) * (s / n), 1.0 / 12.0, 1e-3);
}

TEST(RunTrials, NoLocalOscillatorNoWork) {
    const SplitterConfig cfg(0.9, 0.0);
    const McSummary s = run_trials(10.0, cfg, NoiseConfig::ideal(), gaussian_feedforward(10.0, cfg), 20000, kSeed);
    EXPECT_NEAR(s.w_mean, 0.0, 3.0 * s.w_stderr + 1e-12);
    EXPECT_EQ(s.n_trials, 20000);
}

TEST(RunTrials, ExactFeedforwardReproducesReferenceWork) {
    const SplitterConfig cfg(0.902, 0.780);
    const ThermalTable table = thermal_table(10.0, cfg);
    const std::int64_t n = 1000000;
    const McSummary s = run_trials(10.0, cfg, NoiseConfig::ideal(), exact_feedforward(table), n, kSeed);
    EXPECT_GT(s.w_stderr, 0.0);
    EXPECT_NEAR(s.w_mean, 2.31, 3.0 * s.w_stderr + 0.005);
    EXPECT_NEAR(s.w_mean, mean_work(table, false).w_mean, 3.0 * s.w_stderr);
    // per-trial ledger and table average agree in the mean
    EXPECT_NEAR(s.w_mean, s.w_table_mean, 3.0 * std::hypot(s.w_stderr, s.w_table_stderr));
    EXPECT_LT(double(s.out_of_lattice) / n, 1e-4);

    OutcomeDistribution exact(table.half_width());
    exact.probs() = table.table(ThermalTable::one);
    EXPECT_LT(s.histogram.total_variation(exact), 4.0 / std::sqrt(double(n)));
}

TEST(RunTrials, EnergyLedgerClosesEveryTrial) {
    const SplitterConfig cfg(0.902, 0.780);
    std::vector<TrialResult> trials;
    RunOptions opts;
    opts.trials = &trials;
    const NoiseConfig noisy{0.9, 0.2, 0.1, 0.05, 0.05};
    const McSummary s = run_trials(10.0, cfg, noisy, noisy_feedforward(10.0, cfg, noisy), 50000, kSeed, opts);
    ASSERT_EQ(trials.size(), 50000u);
    for (const auto& t : trials) {
        EXPECT_LT(t.energy_violation, 1e-9);
        EXPECT_GE(t.post_energy, 0.0);
    }
    EXPECT_LT(s.max_energy_violation, 1e-9);
}

TEST(RunTrials, DeterministicAcrossRunsAndThreadCounts) {
    const SplitterConfig cfg(0.902, 0.780);
    const auto table = gaussian_feedforward(10.0, cfg);
    ::setenv("WOF_THREADS", "1", 1);
    const McSummary a = run_trials(10.0, cfg, NoiseConfig::ideal(), table, 30000, kSeed);
    const McSummary b = run_trials(10.0, cfg, NoiseConfig::ideal(), table, 30000, kSeed);
    ::setenv("WOF_THREADS", "4", 1);
    const McSummary c = run_trials(10.0, cfg, NoiseConfig::ideal(), table, 30000, kSeed);
    ::unsetenv("WOF_THREADS");
    for (const McSummary* o : {&b, &c}) {
        EXPECT_TRUE(same_bits(a.w_mean, o->w_mean));
        EXPECT_TRUE(same_bits(a.w_stderr, o->w_stderr));
        EXPECT_TRUE(same_bits(a.w_rms, o->w_rms));
        EXPECT_TRUE(same_bits(a.w_table_mean, o->w_table_mean));
        EXPECT_EQ(a.histogram.probs(), o->histogram.probs());
        EXPECT_EQ(a.out_of_lattice, o->out_of_lattice);
    }
    const McSummary d = run_trials(10.0, cfg, NoiseConfig::ideal(), table, 30000, kSeed + 1);
    EXPECT_FALSE(same_bits(a.w_mean, d.w_mean));
}

TEST(RunTrials, StandardErrorShrinksAsRootN) {
    const SplitterConfig cfg(0.902, 0.780);
    const auto table = gaussian_feedforward(10.0, cfg);
    const double small = run_trials(10.0, cfg, NoiseConfig::ideal(), table, 10000, kSeed).w_stderr;
    const double large = run_trials(10.0, cfg, NoiseConfig::ideal(), table, 1000000, kSeed).w_stderr;
    EXPECT_NEAR(small / large, 10.0, 1.0);
}

TEST(RunTrials, OutcomesOffTheTableAreCountedWithoutWork) {
    const SplitterConfig cfg(0.902, 0.780);
    std::vector<TrialResult> trials;
    RunOptions opts;
    opts.trials = &trials;
    const McSummary s = run_trials(10.0, cfg, NoiseConfig::ideal(), linear_feedforward(1, 0.5), 5000, kSeed, opts);
    std::int64_t off = 0;
    for (const auto& t : trials) {
        if (t.in_lattice) continue;
        ++off;
        EXPECT_EQ(t.work_extracted, 0.0);
        EXPECT_EQ(t.table_work, 0.0);
    }
    EXPECT_GT(off, 0);
    EXPECT_EQ(off, s.out_of_lattice);
}

TEST(ValidateFormula, GaussianMeanWork) {
    const OptimalPoint opt = w_max_analytic(10.0);
    const auto r =
        validate_formula(ValidationTarget::mean_work_gaussian, {10.0, {opt.kappa, opt.beta}}, 1000000, kSeed);
    EXPECT_TRUE(r.pass) << "z=" << r.z_score << " rel=" << r.rel_dev;
    EXPECT_NEAR(r.analytic, mean_work(10.0, {opt.kappa, opt.beta}, Mode::gaussian).w_mean, 1e-15);
}

TEST(ValidateFormula, NoisyDetector) {
    for (double kd2 : {0.9, 0.95 * 0.95}) {
        const NoiseConfig noise{kd2, 0.0, 0.0, 0.05, 0.05};
        const OptimalPoint opt = optimize_with_noise(10.0, noise);
        const auto r = validate_formula(ValidationTarget::work_with_noise,
                                        {10.0, SplitterConfig::from_tap(opt.epsilon, opt.xi), noise}, 1000000, kSeed);
        EXPECT_TRUE(r.pass) << "kd2=" << kd2 << " z=" << r.z_score << " rel=" << r.rel_dev;
    }
}

// The spread of the table work follows from the Gaussian identity only when
// the count differences are Gaussian. Under thermal input the shot noise
// scales with |alpha|^2, so the spread is larger; compare against the
// sample spread of the dumped trials instead.
TEST(ValidateFormula, WorkSpreadMatchesTrialSpread) {
    const OptimalPoint opt = w_max_analytic(10.0);
    const SplitterConfig cfg(opt.kappa, opt.beta);
    std::vector<TrialResult> trials;
    RunOptions opts;
    opts.trials = &trials;
    const McSummary s = run_trials(10.0, cfg, NoiseConfig::ideal(), gaussian_feedforward(10.0, cfg), 200000, kSeed,
                                   opts);
    double m = 0.0;
    for (const auto& t : trials) m += t.table_work;
    m /= double(trials.size());
    double v = 0.0;
    for (const auto& t : trials) v += (t.table_work - m) * (t.table_work - m);
    EXPECT_NEAR(s.w_rms, std::sqrt(v / double(trials.size())), 1e-9 * s.w_rms);
    const double identity = mean_work(10.0, cfg, Mode::gaussian).w_rms;
    EXPECT_GT(s.w_rms, identity + 10.0 * s.w_rms_stderr);
}
