// wof: command-line front end for the work-by-observation-and-feedforward
// engine. Every command writes CSV (or key=value text) to stdout or to
// output.path. Exit status: 0 success, 1 validation failure or numerical
// error, 2 usage or configuration error.

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "wof/wof.hpp"

namespace {

using namespace wof;

constexpr int kExitOk = 0;
constexpr int kExitFailed = 1;
constexpr int kExitUsage = 2;

struct Overrides {
    std::string config_path;
    std::map<std::string, std::string> values;  // dotted field -> text
    std::vector<std::string> sets;              // --set section.key=value
};

// Binds a flag that overrides one configuration field.
void flag(CLI::App* app, Overrides& ov, const std::string& name, const std::string& field, const std::string& help) {
    app->add_option_function<std::string>(name, [&ov, field](const std::string& v) { ov.values[field] = v; }, help);
}

RunConfig load(const Overrides& ov) {
    RunConfig cfg;
    if (!ov.config_path.empty()) {
        std::ifstream in(ov.config_path);
        if (!in) throw ConfigError("cannot read config file " + ov.config_path);
        std::stringstream buf;
        buf << in.rdbuf();
        try {
            cfg = parse_config(buf.str());
        } catch (const ConfigError& e) {
            throw ConfigError(ov.config_path + ": " + e.what());
        }
    }
    for (const auto& s : ov.sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw ConfigError("--set " + s + ": expected section.key=value");
        set_field(cfg, s.substr(0, eq), s.substr(eq + 1));
    }
    for (const auto& [field, value] : ov.values) set_field(cfg, field, value);
    validate(cfg);
    return cfg;
}

Mode parse_mode(const std::string& m) {
    if (m == "exact") return Mode::exact;
    if (m == "gaussian") return Mode::gaussian;
    if (m == "low_excitation") return Mode::low_excitation;
    throw ConfigError("unknown mode " + m);
}

// Output goes to output.path when set, stdout otherwise.
class Sink {
public:
    explicit Sink(const std::string& path) {
        if (!path.empty()) {
            file_ = std::make_unique<std::ofstream>(path);
            if (!*file_) throw ConfigError("cannot write " + path);
        }
    }
    std::ostream& out() { return file_ ? *file_ : std::cout; }

private:
    std::unique_ptr<std::ofstream> file_;
};

std::vector<double> linspace(double a, double b, std::int64_t n) {
    std::vector<double> v;
    for (std::int64_t i = 0; i < n; ++i) v.push_back(n == 1 ? a : a + (b - a) * double(i) / double(n - 1));
    return v;
}

std::vector<double> logspace(double a, double b, std::int64_t n) {
    std::vector<double> v = linspace(std::log10(a), std::log10(b), n);
    for (double& x : v) x = std::pow(10.0, x);
    return v;
}

void echo_engine(CsvWriter& csv, const RunConfig& c) {
    csv.param("engine.nbar", c.engine.nbar);
    csv.param("engine.kappa", c.engine.kappa);
    csv.param("engine.beta", c.engine.beta);
    csv.param("engine.mode", c.engine.mode);
    csv.param("engine.unsqueeze", c.engine.unsqueeze ? "true" : "false");
}

void echo_noise(CsvWriter& csv, const RunConfig& c) {
    csv.param("noise.kappa_d2", c.noise.kappa_d2);
    csv.param("noise.n_tau", c.noise.n_tau);
    csv.param("noise.n_h", c.noise.n_h);
    csv.param("noise.n_lo", c.noise.n_lo);
    csv.param("noise.n_d", c.noise.n_d);
}

void echo_sweep(CsvWriter& csv, const RunConfig& c) {
    csv.param("sweep.nbar_min", c.sweep.nbar_min);
    csv.param("sweep.nbar_max", c.sweep.nbar_max);
    csv.param("sweep.points", static_cast<double>(c.sweep.points));
}

int cmd_optimize(const RunConfig& c) {
    const Mode mode = parse_mode(c.engine.mode);
    Sink sink(c.output.path);
    CsvWriter csv(sink.out(), "optimize");
    echo_sweep(csv, c);
    csv.param("engine.mode", c.engine.mode);
    csv.param("engine.unsqueeze", c.engine.unsqueeze ? "true" : "false");
    const std::string wcol = std::string("W_") + to_string(mode) + "_opt";
    csv.header({"nbar", wcol, "W_analytic", "kappa", "beta"});
    for (double n : linspace(c.sweep.nbar_min, c.sweep.nbar_max, c.sweep.points)) {
        const OptimalPoint opt = optimize_numeric(n, mode, c.engine.unsqueeze);
        csv.row({n, opt.w_max, w_max_analytic(n).w_max, opt.kappa, opt.beta});
    }
    return kExitOk;
}

int cmd_efficiency(const RunConfig& c, const std::vector<std::string>& families) {
    Sink sink(c.output.path);
    CsvWriter csv(sink.out(), "efficiency");
    echo_sweep(csv, c);
    echo_noise(csv, c);
    csv.header({"kappa_d2", "t_d", "log10_nbar", "eta", "eta_max1", "q_reset_over_ein", "w_net", "q_reset", "kappa",
                "beta"});
    for (const std::string& fam : families) {
        const auto colon = fam.find(':');
        if (colon == std::string::npos) throw ConfigError("--family " + fam + ": expected kappa_d2:t_d");
        RunConfig fc = c;
        set_field(fc, "noise.kappa_d2", fam.substr(0, colon));
        set_field(fc, "detector.t_d", fam.substr(colon + 1));
        validate(fc);
        const NoiseConfig noise = fc.noise_config();
        const DetectorThermalState det =
            fc.detector.n_d0 ? DetectorThermalState{*fc.detector.n_d0, fc.detector.t_d}
                             : DetectorThermalState::at_temperature(fc.detector.t_d);
        for (double n : logspace(c.sweep.nbar_min, c.sweep.nbar_max, c.sweep.points)) {
            const OptimalPoint opt = optimize_with_noise(n, noise);
            const WorkBudget b = work_budget(n, SplitterConfig::from_tap(opt.epsilon, opt.xi), noise, det);
            csv.row({noise.kappa_d2, det.t_d, std::log10(n), b.eta, b.eta_max1, b.q_reset / n, b.w_net, b.q_reset,
                     opt.kappa, opt.beta});
        }
    }
    return kExitOk;
}

int cmd_validate(const RunConfig& c, const std::string& suite) {
    std::int64_t trials = 0;
    if (suite == "quick") trials = 10000;
    else if (suite == "standard") trials = 1000000;
    else if (suite == "deep") trials = 100000000;
    else if (suite == "config") trials = c.mc.trials;
    else throw ConfigError("unknown suite " + suite + " (quick, standard, deep, config)");

    const OptimalPoint opt = w_max_analytic(10.0);
    const SplitterConfig ideal_cfg(opt.kappa, opt.beta);
    NoiseConfig fig_noise;
    fig_noise.kappa_d2 = 0.9;
    fig_noise.n_lo = 0.05;
    fig_noise.n_d = 0.05;
    const OptimalPoint noisy = optimize_with_noise(10.0, fig_noise);
    const SplitterConfig noisy_cfg = SplitterConfig::from_tap(noisy.epsilon, noisy.xi);

    Sink sink(c.output.path);
    std::ostream& out = sink.out();
    out << "# wof " << kVersion << " validate suite=" << suite << " trials=" << trials << " seed=" << c.mc.seed
        << '\n';
    bool all = true;
    auto report = [&](const ValidationReport& r) {
        out << to_string(r.target) << " estimate=" << format_number(r.estimate)
            << " analytic=" << format_number(r.analytic) << " stderr=" << format_number(r.stderr_)
            << " z=" << format_number(r.z_score) << " rel_dev=" << format_number(r.rel_dev)
            << " energy_violation=" << format_number(r.summary.max_energy_violation)
            << " out_of_lattice=" << r.summary.out_of_lattice << (r.pass ? " PASS" : " FAIL") << '\n';
        all = all && r.pass;
    };
    report(validate_formula(ValidationTarget::mean_work_gaussian, {10.0, ideal_cfg}, trials, c.mc.seed));
    report(validate_formula(ValidationTarget::work_with_noise, {10.0, noisy_cfg, fig_noise}, trials, c.mc.seed));
    report(validate_formula(ValidationTarget::w_rms_identity, {10.0, ideal_cfg}, trials, c.mc.seed));
    out << (all ? "all PASS" : "some FAIL") << '\n';
    return all ? kExitOk : kExitFailed;
}

int cmd_distribution(const RunConfig& c) {
    const Mode mode = parse_mode(c.engine.mode);
    const SplitterConfig cfg(c.engine.kappa, c.engine.beta);
    const OutcomeDistribution d = outcome_distribution_thermal(c.engine.nbar, cfg, mode);
    Sink sink(c.output.path);
    CsvWriter csv(sink.out(), "distribution");
    echo_engine(csv, c);
    csv.header({"dnx", "dnp", "prob"});
    const int n = d.half_width();
    for (int i = -n; i <= n; ++i)
        for (int j = -n; j <= n; ++j) csv.row({double(i), double(j), d[{i, j}]});
    return kExitOk;
}

int cmd_worktable(const RunConfig& c) {
    const Mode mode = parse_mode(c.engine.mode);
    const SplitterConfig cfg(c.engine.kappa, c.engine.beta);
    Sink sink(c.output.path);
    CsvWriter csv(sink.out(), "worktable");
    echo_engine(csv, c);
    csv.header({"dnx", "dnp", "prob", "W", "W_US"});
    for (const OutcomeWorkRow& r : outcome_work_table(c.engine.nbar, cfg, mode))
        csv.row({double(r.outcome.dnx), double(r.outcome.dnp), r.prob, r.w_displacement, r.w_unsqueeze});
    return kExitOk;
}

int cmd_sweep(const RunConfig& c, bool at_config) {
    Sink sink(c.output.path);
    CsvWriter csv(sink.out(), "sweep");
    echo_sweep(csv, c);
    csv.param("at", at_config ? "config" : "analytic_optimum");
    if (at_config) echo_engine(csv, c);
    csv.header({"nbar", "kappa", "beta", "W_exact", "W_gauss", "W_lowex", "W_US", "E_rem"});
    for (double n : linspace(c.sweep.nbar_min, c.sweep.nbar_max, c.sweep.points)) {
        double kappa = c.engine.kappa;
        double beta = c.engine.beta;
        if (!at_config) {
            const OptimalPoint opt = w_max_analytic(n);
            if (!(opt.epsilon > 0.0 && opt.epsilon < 1.0)) continue;  // no physical optimum below threshold
            kappa = opt.kappa;
            beta = opt.beta;
        }
        const SplitterConfig cfg(kappa, beta);
        const WorkEstimate ex = mean_work(n, cfg, Mode::exact, false);
        const WorkEstimate ga = mean_work(n, cfg, Mode::gaussian);
        const WorkEstimate lo = mean_work(n, cfg, Mode::low_excitation);
        csv.row({n, kappa, beta, ex.w_mean, ga.w_mean, lo.w_mean, ex.w_unsqueeze, ex.e_rem});
    }
    return kExitOk;
}

int cmd_noise_sweep(const RunConfig& c, const std::string& param, double lo, double hi, std::int64_t points) {
    const SplitterConfig cfg(c.engine.kappa, c.engine.beta);
    Sink sink(c.output.path);
    CsvWriter csv(sink.out(), "noise-sweep");
    echo_engine(csv, c);
    echo_noise(csv, c);
    csv.param("param", param);
    csv.header({"kappa_d2", "n_tau", "n_h", "n_lo", "n_d", "W", "W_ideal"});
    const double ideal = work_with_noise(c.engine.nbar, cfg, NoiseConfig::ideal());
    for (double v : linspace(lo, hi, points)) {
        RunConfig pc = c;
        set_field(pc, "noise." + param, format_number(v));
        validate(pc);
        const NoiseConfig n = pc.noise_config();
        csv.row({n.kappa_d2, n.n_tau, n.n_h, n.n_lo, n.n_d, work_with_noise(c.engine.nbar, cfg, n), ideal});
    }
    return kExitOk;
}

int cmd_budget(const RunConfig& c) {
    const Mode mode = parse_mode(c.engine.mode);
    const SplitterConfig cfg(c.engine.kappa, c.engine.beta);
    const EnergyFlows f = energy_flows(c.engine.nbar, cfg, mode, c.engine.unsqueeze);
    const EnergyBudget a = energy_budget(c.engine.nbar);
    const NoiseConfig noise = c.noise_config();
    const DetectorThermalState det = c.detector.n_d0 ? DetectorThermalState{*c.detector.n_d0, c.detector.t_d}
                                                     : DetectorThermalState::at_temperature(c.detector.t_d);
    const double load = detector_load(c.engine.nbar, cfg, noise);
    const ResetCost rc = reset_cost(load, det);
    Sink sink(c.output.path);
    std::ostream& out = sink.out();
    out << "# wof " << kVersion << " budget nbar=" << format_number(c.engine.nbar) << " kappa="
        << format_number(c.engine.kappa) << " beta=" << format_number(c.engine.beta) << " mode=" << c.engine.mode
        << '\n';
    auto kv = [&](const char* k, double v) { out << k << '=' << format_number(v) << '\n'; };
    kv("e_in", f.e_in);
    kv("e_lo", f.e_lo);
    kv("e_det", f.e_det);
    kv("w_extracted", f.w_extracted);
    kv("w_net", f.w_net);
    kv("e_rem", f.e_rem);
    kv("balance_residual", f.residual);
    kv("asymptotic_e_lo", a.e_lo);
    kv("asymptotic_e_det", a.e_det);
    kv("asymptotic_e_rem", a.e_rem);
    kv("asymptotic_w", a.w);
    kv("asymptotic_residual", a.residual);
    kv("detector_load", load);
    kv("i_bits", rc.i_bits);
    kv("i_shorthand", information_shorthand(c.engine.nbar));
    kv("q_reset", rc.q_reset);
    return kExitOk;
}

int cmd_mc(const RunConfig& c) {
    const SplitterConfig cfg(c.engine.kappa, c.engine.beta);
    const NoiseConfig noise = c.noise_config();
    const Mode mode = parse_mode(c.engine.mode);
    FeedforwardTable table = noise.is_ideal()
                                 ? (mode == Mode::exact ? exact_feedforward(thermal_table(c.engine.nbar, cfg))
                                                        : gaussian_feedforward(c.engine.nbar, cfg))
                                 : noisy_feedforward(c.engine.nbar, cfg, noise);
    std::vector<TrialResult> trials;
    RunOptions opts;
    opts.block_size = c.mc.block;
    if (!c.output.dump.empty()) opts.trials = &trials;
    const McSummary s = run_trials(c.engine.nbar, cfg, noise, table, c.mc.trials, c.mc.seed, opts);

    Sink sink(c.output.path);
    std::ostream& out = sink.out();
    out << "# wof " << kVersion << " mc\n" << emit_config(c);
    auto kv = [&](const char* k, double v) { out << k << '=' << format_number(v) << '\n'; };
    out << "[summary]\n";
    kv("n_trials", static_cast<double>(s.n_trials));
    kv("w_mean", s.w_mean);
    kv("w_stderr", s.w_stderr);
    kv("w_table_mean", s.w_table_mean);
    kv("w_rms", s.w_rms);
    kv("w_rms_stderr", s.w_rms_stderr);
    kv("out_of_lattice", static_cast<double>(s.out_of_lattice));
    kv("max_energy_violation", s.max_energy_violation);

    if (!c.output.dump.empty()) {
        std::ofstream dump(c.output.dump);
        if (!dump) throw ConfigError("cannot write " + c.output.dump);
        CsvWriter csv(dump, "mc-trials");
        csv.header({"trial", "dnx", "dnp", "x", "p", "work_extracted", "post_energy", "table_work"});
        for (std::size_t i = 0; i < trials.size(); ++i) {
            const TrialResult& t = trials[i];
            csv.row({double(i), double(t.outcome.dnx), double(t.outcome.dnp), t.alpha_true.x, t.alpha_true.p,
                     t.work_extracted, t.post_energy, t.table_work});
        }
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Work extraction from thermal light by homodyne observation and feedforward"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(wof::kVersion));

    Overrides ov;
    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", ov.config_path, "Configuration file (key = value with [sections])");
        sub->add_option("--set", ov.sets, "Override any field: section.key=value");
        flag(sub, ov, "--out", "output.path", "Output file (default stdout)");
    };
    auto engine_flags = [&](CLI::App* sub) {
        flag(sub, ov, "--nbar", "engine.nbar", "Mean thermal occupation of the input");
        flag(sub, ov, "--kappa", "engine.kappa", "Tap splitter amplitude transmissivity");
        flag(sub, ov, "--beta", "engine.beta", "Local-oscillator amplitude");
        flag(sub, ov, "--mode", "engine.mode", "exact, gaussian or low_excitation");
    };
    auto sweep_flags = [&](CLI::App* sub) {
        flag(sub, ov, "--nbar-min", "sweep.nbar_min", "Smallest nbar");
        flag(sub, ov, "--nbar-max", "sweep.nbar_max", "Largest nbar");
        flag(sub, ov, "--points", "sweep.points", "Number of nbar values");
    };
    auto noise_flags = [&](CLI::App* sub) {
        flag(sub, ov, "--kappa-d2", "noise.kappa_d2", "Detector power efficiency");
        flag(sub, ov, "--n-tau", "noise.n_tau", "Thermal occupation at the tap splitter's free port");
        flag(sub, ov, "--n-h", "noise.n_h", "Thermal occupation at the homodyne splitter");
        flag(sub, ov, "--n-lo", "noise.n_lo", "Thermal occupation of the local oscillators");
        flag(sub, ov, "--n-d", "noise.n_d", "Thermal occupation at the detector loss ports");
    };

    auto* optimize = app.add_subcommand("optimize", "Optimal work versus nbar");
    common(optimize);
    sweep_flags(optimize);
    flag(optimize, ov, "--mode", "engine.mode", "exact, gaussian or low_excitation");
    bool unsqueeze = false;
    optimize->add_flag("--unsqueeze", unsqueeze, "Include unsqueezing work in the objective");

    auto* efficiency = app.add_subcommand("efficiency", "Efficiency and reset cost per detector family");
    common(efficiency);
    sweep_flags(efficiency);
    noise_flags(efficiency);
    std::vector<std::string> families{"1.0:0.01", "0.9:0.01", "0.8:0.01", "1.0:0.1", "0.9:0.1", "0.8:0.1"};
    efficiency->add_option("--family", families, "Detector family kappa_d2:t_d (repeatable)");

    auto* validate_cmd = app.add_subcommand("validate", "Monte Carlo check of the closed forms");
    common(validate_cmd);
    std::string suite = "quick";
    validate_cmd->add_option("--suite", suite, "quick (1e4 trials), standard (1e6), deep (1e8) or config");
    flag(validate_cmd, ov, "--seed", "mc.seed", "Master seed");

    auto* distribution = app.add_subcommand("distribution", "Outcome probabilities for thermal input");
    common(distribution);
    engine_flags(distribution);

    auto* worktable = app.add_subcommand("worktable", "Per-outcome probability and work");
    common(worktable);
    engine_flags(worktable);

    auto* sweep = app.add_subcommand("sweep", "Work in all three models versus nbar");
    common(sweep);
    sweep_flags(sweep);
    engine_flags(sweep);
    bool at_config = false;
    sweep->add_flag("--at-config", at_config, "Use engine.kappa/beta instead of the analytic optimum");

    auto* noise_sweep = app.add_subcommand("noise-sweep", "Noisy work while one noise parameter varies");
    common(noise_sweep);
    engine_flags(noise_sweep);
    noise_flags(noise_sweep);
    std::string param = "n_lo";
    double lo = 0.0, hi = 1.0;
    std::int64_t points = 11;
    noise_sweep->add_option("--param", param, "kappa_d2, n_tau, n_h, n_lo or n_d")
        ->check(CLI::IsMember({"kappa_d2", "n_tau", "n_h", "n_lo", "n_d"}));
    noise_sweep->add_option("--from", lo, "First value");
    noise_sweep->add_option("--to", hi, "Last value");
    noise_sweep->add_option("--steps", points, "Number of values")->check(CLI::PositiveNumber);

    auto* budget = app.add_subcommand("budget", "Energy flows and reset cost at one configuration");
    common(budget);
    engine_flags(budget);
    noise_flags(budget);
    flag(budget, ov, "--t-d", "detector.t_d", "Detector temperature");

    auto* mc = app.add_subcommand("mc", "Run the Monte Carlo simulation at one configuration");
    common(mc);
    engine_flags(mc);
    noise_flags(mc);
    flag(mc, ov, "--trials", "mc.trials", "Number of trials");
    flag(mc, ov, "--seed", "mc.seed", "Master seed");
    flag(mc, ov, "--dump", "output.dump", "Write every trial to this CSV file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (unsqueeze) ov.values["engine.unsqueeze"] = "true";
        if (efficiency->parsed()) {
            // imperfect-detector defaults unless overridden
            if (!ov.values.count("noise.n_lo")) ov.values["noise.n_lo"] = "0.05";
            if (!ov.values.count("noise.n_d")) ov.values["noise.n_d"] = "0.05";
            if (!ov.values.count("sweep.nbar_min")) ov.values["sweep.nbar_min"] = "10";
            if (!ov.values.count("sweep.nbar_max")) ov.values["sweep.nbar_max"] = "10000";
            if (!ov.values.count("sweep.points")) ov.values["sweep.points"] = "31";
        }
        const RunConfig cfg = load(ov);
        if (optimize->parsed()) return cmd_optimize(cfg);
        if (efficiency->parsed()) return cmd_efficiency(cfg, families);
        if (validate_cmd->parsed()) return cmd_validate(cfg, suite);
        if (distribution->parsed()) return cmd_distribution(cfg);
        if (worktable->parsed()) return cmd_worktable(cfg);
        if (sweep->parsed()) return cmd_sweep(cfg, at_config);
        if (noise_sweep->parsed()) return cmd_noise_sweep(cfg, param, lo, hi, points);
        if (budget->parsed()) return cmd_budget(cfg);
        if (mc->parsed()) return cmd_mc(cfg);
    } catch (const wof::ConfigError& e) {
        std::cerr << "wof: " << e.what() << '\n';
        return kExitUsage;
    } catch (const wof::InvalidArgument& e) {
        std::cerr << "wof: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "wof: " << e.what() << '\n';
        return kExitFailed;
    }
    return kExitUsage;
}
