#pragma once

// Run configuration: flat key = value text grouped in [sections].
//
//   [engine]
//   nbar = 10
//   kappa = 0.902
//
// Unknown keys, malformed values and physically invalid parameters are
// rejected with the line and field that caused them.

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "wof/error.hpp"
#include "wof/noise.hpp"

namespace wof {

class ConfigError : public Error {
public:
    using Error::Error;
};

struct RunConfig {
    struct Engine {
        double nbar = 10.0;
        double kappa = 0.902;
        double beta = 0.780;
        std::string mode = "exact";
        bool unsqueeze = false;
        friend bool operator==(const Engine&, const Engine&) = default;
    } engine;
    struct Sweep {
        double nbar_min = 1.0;
        double nbar_max = 20.0;
        std::int64_t points = 40;
        friend bool operator==(const Sweep&, const Sweep&) = default;
    } sweep;
    struct Noise {
        double kappa_d2 = 1.0;
        double n_tau = 0.0;
        double n_h = 0.0;
        double n_lo = 0.0;
        double n_d = 0.0;
        friend bool operator==(const Noise&, const Noise&) = default;
    } noise;
    struct Detector {
        double t_d = 0.0;
        std::optional<double> n_d0;  // thermal occupation at t_d when absent
        friend bool operator==(const Detector&, const Detector&) = default;
    } detector;
    struct MonteCarlo {
        std::int64_t trials = 1000000;
        std::uint64_t seed = 20240601;
        std::int64_t block = 4096;
        friend bool operator==(const MonteCarlo&, const MonteCarlo&) = default;
    } mc;
    struct Output {
        std::string path;  // empty: standard output
        std::string dump;  // per-trial CSV for the mc command
        friend bool operator==(const Output&, const Output&) = default;
    } output;

    NoiseConfig noise_config() const {
        return {noise.kappa_d2, noise.n_tau, noise.n_h, noise.n_lo, noise.n_d};
    }

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

namespace detail {

using FieldRef = std::variant<double*, std::int64_t*, std::uint64_t*, bool*, std::string*, std::optional<double>*>;

struct Field {
    std::string_view section;
    std::string_view key;
    FieldRef ref;
};

inline std::vector<Field> config_fields(RunConfig& c) {
    return {
        {"engine", "nbar", &c.engine.nbar},       {"engine", "kappa", &c.engine.kappa},
        {"engine", "beta", &c.engine.beta},       {"engine", "mode", &c.engine.mode},
        {"engine", "unsqueeze", &c.engine.unsqueeze},
        {"sweep", "nbar_min", &c.sweep.nbar_min}, {"sweep", "nbar_max", &c.sweep.nbar_max},
        {"sweep", "points", &c.sweep.points},
        {"noise", "kappa_d2", &c.noise.kappa_d2}, {"noise", "n_tau", &c.noise.n_tau},
        {"noise", "n_h", &c.noise.n_h},           {"noise", "n_lo", &c.noise.n_lo},
        {"noise", "n_d", &c.noise.n_d},
        {"detector", "t_d", &c.detector.t_d},     {"detector", "n_d0", &c.detector.n_d0},
        {"mc", "trials", &c.mc.trials},           {"mc", "seed", &c.mc.seed},
        {"mc", "block", &c.mc.block},
        {"output", "path", &c.output.path},       {"output", "dump", &c.output.dump},
    };
}

inline std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

template <class T>
bool parse_integer(std::string_view text, T& out) {
    const auto* end = text.data() + text.size();
    const auto res = std::from_chars(text.data(), end, out);
    return res.ec == std::errc() && res.ptr == end;
}

inline bool parse_double(std::string_view text, double& out) {
    const auto* end = text.data() + text.size();
    const auto res = std::from_chars(text.data(), end, out);
    return res.ec == std::errc() && res.ptr == end && std::isfinite(out);
}

// Returns an error message, empty on success.
inline std::string assign(const FieldRef& ref, std::string_view text) {
    struct Visitor {
        std::string_view text;
        std::string operator()(double* p) const { return parse_double(text, *p) ? "" : "expected a number"; }
        std::string operator()(std::int64_t* p) const { return parse_integer(text, *p) ? "" : "expected an integer"; }
        std::string operator()(std::uint64_t* p) const {
            return parse_integer(text, *p) ? "" : "expected a non-negative integer";
        }
        std::string operator()(bool* p) const {
            if (text == "true" || text == "1") *p = true;
            else if (text == "false" || text == "0") *p = false;
            else return "expected true or false";
            return "";
        }
        std::string operator()(std::string* p) const {
            *p = std::string(text);
            return "";
        }
        std::string operator()(std::optional<double>* p) const {
            double v;
            if (!parse_double(text, v)) return "expected a number";
            *p = v;
            return "";
        }
    };
    return std::visit(Visitor{text}, ref);
}

inline std::string render(const FieldRef& ref) {
    struct Visitor {
        std::string operator()(const double* p) const {
            char buf[40];
            std::snprintf(buf, sizeof buf, "%.17g", *p);
            return buf;
        }
        std::string operator()(const std::int64_t* p) const { return std::to_string(*p); }
        std::string operator()(const std::uint64_t* p) const { return std::to_string(*p); }
        std::string operator()(const bool* p) const { return *p ? "true" : "false"; }
        std::string operator()(const std::string* p) const { return *p; }
        std::string operator()(const std::optional<double>* p) const { return *p ? (*this)(&**p) : ""; }
    };
    return std::visit(Visitor{}, ref);
}

inline void check(bool ok, const char* field, const char* message) {
    if (!ok) throw ConfigError(std::string(field) + ": " + message);
}

} // namespace detail

/// Physical and structural checks; messages name the offending field.
inline void validate(const RunConfig& c) {
    using detail::check;
    check(c.engine.nbar > 0.0, "engine.nbar", "must be positive");
    check(c.engine.kappa > 0.0 && c.engine.kappa < 1.0, "engine.kappa", "must lie in (0, 1)");
    check(c.engine.beta >= 0.0, "engine.beta", "must be >= 0");
    check(c.engine.mode == "exact" || c.engine.mode == "gaussian" || c.engine.mode == "low_excitation",
          "engine.mode", "must be exact, gaussian or low_excitation");
    check(c.sweep.nbar_min > 0.0, "sweep.nbar_min", "must be positive");
    check(c.sweep.nbar_max >= c.sweep.nbar_min, "sweep.nbar_max", "must be >= sweep.nbar_min");
    check(c.sweep.points >= 1, "sweep.points", "must be >= 1");
    check(c.noise.kappa_d2 > 0.0 && c.noise.kappa_d2 <= 1.0, "noise.kappa_d2", "must lie in (0, 1]");
    check(c.noise.n_tau >= 0.0, "noise.n_tau", "must be >= 0");
    check(c.noise.n_h >= 0.0, "noise.n_h", "must be >= 0");
    check(c.noise.n_lo >= 0.0, "noise.n_lo", "must be >= 0");
    check(c.noise.n_d >= 0.0, "noise.n_d", "must be >= 0");
    check(c.detector.t_d >= 0.0, "detector.t_d", "must be >= 0");
    check(!c.detector.n_d0 || *c.detector.n_d0 >= 0.0, "detector.n_d0", "must be >= 0");
    check(c.mc.trials >= 1, "mc.trials", "must be >= 1");
    check(c.mc.block >= 1, "mc.block", "must be >= 1");
}

/// Sets one field by its dotted name, e.g. "engine.kappa". Does not validate
/// the configuration as a whole.
inline void set_field(RunConfig& c, std::string_view dotted, std::string_view value) {
    const auto dot = dotted.find('.');
    if (dot == std::string_view::npos) throw ConfigError(std::string(dotted) + ": expected section.key");
    const auto section = dotted.substr(0, dot);
    const auto key = dotted.substr(dot + 1);
    for (const auto& f : detail::config_fields(c)) {
        if (f.section == section && f.key == key) {
            const std::string err = detail::assign(f.ref, detail::trim(value));
            if (!err.empty()) throw ConfigError(std::string(dotted) + ": " + err);
            return;
        }
    }
    throw ConfigError(std::string(dotted) + ": unknown field");
}

inline RunConfig parse_config(std::string_view text) {
    RunConfig c;
    std::string section;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        const auto raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        const auto line = detail::trim(raw);
        const std::string where = "line " + std::to_string(line_no) + ": ";
        if (line.empty() || line.front() == '#' || line.front() == ';') continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(where + "unterminated section header");
            section = std::string(detail::trim(line.substr(1, line.size() - 2)));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ConfigError(where + "expected key = value");
        if (section.empty()) throw ConfigError(where + "key outside any [section]");
        const std::string dotted = section + "." + std::string(detail::trim(line.substr(0, eq)));
        try {
            set_field(c, dotted, line.substr(eq + 1));
        } catch (const ConfigError& e) {
            throw ConfigError(where + e.what());
        }
    }
    validate(c);
    return c;
}

/// Text that parse_config maps back to an identical configuration.
inline std::string emit_config(const RunConfig& config) {
    RunConfig c = config;
    std::ostringstream out;
    std::string_view section;
    for (const auto& f : detail::config_fields(c)) {
        if (std::holds_alternative<std::optional<double>*>(f.ref) && !*std::get<std::optional<double>*>(f.ref))
            continue;
        if (f.section != section) {
            if (!section.empty()) out << '\n';
            out << '[' << f.section << "]\n";
            section = f.section;
        }
        out << f.key << " = " << detail::render(f.ref) << '\n';
    }
    return out.str();
}

} // namespace wof
