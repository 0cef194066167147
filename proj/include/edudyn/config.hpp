#pragma once

// Run configuration: flat key=value files with dotted section prefixes
// (model.rho=0.98) or an equivalent nested JSON object, parsed totally with
// location-precise diagnostics. Unknown keys are errors.

#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "edudyn/analysis.hpp"
#include "edudyn/csv.hpp"
#include "edudyn/errors.hpp"
#include "edudyn/params.hpp"

namespace edudyn {

enum class Experiment {
    Simulate,
    Cobweb,
    FixedPoints,
    AbsorbingInterval,
    Bifurcate,
    Stability,
    MuThreshold,
    ComparativeStatics,
};

inline const char* to_string(Experiment e) {
    switch (e) {
        case Experiment::Simulate: return "simulate";
        case Experiment::Cobweb: return "cobweb";
        case Experiment::FixedPoints: return "fixed-points";
        case Experiment::AbsorbingInterval: return "absorbing-interval";
        case Experiment::Bifurcate: return "bifurcate";
        case Experiment::Stability: return "stability";
        case Experiment::MuThreshold: return "mu-threshold";
        default: return "comparative-statics";
    }
}

inline std::optional<Experiment> experiment_from(const std::string& s) {
    if (s == "simulate") return Experiment::Simulate;
    if (s == "cobweb") return Experiment::Cobweb;
    if (s == "fixed-points") return Experiment::FixedPoints;
    if (s == "absorbing-interval") return Experiment::AbsorbingInterval;
    if (s == "bifurcate") return Experiment::Bifurcate;
    if (s == "stability") return Experiment::Stability;
    if (s == "mu-threshold") return Experiment::MuThreshold;
    if (s == "comparative-statics") return Experiment::ComparativeStatics;
    return std::nullopt;
}

struct RunConfig {
    ModelParams model;
    PopulationMix mix;
    std::optional<Experiment> experiment;

    MapKind map = MapKind::OneD;
    std::size_t steps = 300;
    std::size_t burn_in = 2000;
    std::size_t samples = 300;
    std::size_t lyapunov_steps = 10000;
    double e0 = 0.3;
    double lambda0 = 0.5;

    std::string sweep_parameter = "sigma";
    double sweep_lo = 0.0;
    double sweep_hi = 20.0;
    std::size_t sweep_grid_points = 1000;
    bool sweep_continuation = false;

    std::size_t fixed_points_grid_n = 4000;
    std::size_t cobweb_steps = 60;
    std::size_t cobweb_curve_grid_n = 2000;
    std::vector<double> cs_kappas;  // empty: evaluate at model.kappa only

    std::string output_dir = "out";

    bool sigma_pi_explicit = false;  // config pinned sigma_pi; otherwise it follows sigma
};

namespace detail {

inline double parse_double(const std::string& value, const std::string& where) {
    char* end = nullptr;
    const double v = std::strtod(value.c_str(), &end);
    if (!end || *end != '\0')
        throw ConfigError(where + ": expected a number, got '" + value + "'");
    return v;
}

inline std::size_t parse_size(const std::string& value, const std::string& where) {
    const double v = parse_double(value, where);
    if (v < 0.0 || v != std::floor(v) || v > 1e12)
        throw ConfigError(where + ": expected a non-negative integer, got '" + value + "'");
    return static_cast<std::size_t>(v);
}

inline bool parse_bool(const std::string& value, const std::string& where) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw ConfigError(where + ": expected true/false, got '" + value + "'");
}

inline std::vector<double> parse_double_list(const std::string& value, const std::string& where) {
    std::vector<double> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(parse_double(item, where));
    if (out.empty()) throw ConfigError(where + ": expected a comma-separated number list");
    return out;
}

inline void apply_key(RunConfig& cfg, const std::string& key, const std::string& value,
                      const std::string& where) {
    if (key == "experiment") {
        auto e = experiment_from(value);
        if (!e) throw ConfigError(where + ": unknown experiment '" + value + "'");
        cfg.experiment = *e;
    } else if (key == "model.income") {
        cfg.model.income = parse_double(value, where);
    } else if (key == "model.price_education") {
        cfg.model.price_education = parse_double(value, where);
    } else if (key == "model.price_consumption") {
        cfg.model.price_consumption = parse_double(value, where);
    } else if (key == "model.rho") {
        cfg.model.rho = parse_double(value, where);
    } else if (key == "model.rho_pi") {
        cfg.model.rho_pi = parse_double(value, where);
    } else if (key == "model.sigma") {
        cfg.model.sigma = parse_double(value, where);
    } else if (key == "model.sigma_pi") {
        cfg.model.sigma_pi = parse_double(value, where);
        cfg.sigma_pi_explicit = true;
    } else if (key == "model.kappa") {
        cfg.model.kappa = parse_double(value, where);
    } else if (key == "model.pi_bar") {
        cfg.model.pi_bar = parse_double(value, where);
    } else if (key == "mix.lambda") {
        cfg.mix.lambda = parse_double(value, where);
    } else if (key == "mix.mu") {
        cfg.mix.mu = parse_double(value, where);
    } else if (key == "run.map") {
        if (value == "1d") cfg.map = MapKind::OneD;
        else if (value == "2d") cfg.map = MapKind::TwoD;
        else throw ConfigError(where + ": run.map must be 1d or 2d, got '" + value + "'");
    } else if (key == "run.steps") {
        cfg.steps = parse_size(value, where);
    } else if (key == "run.burn_in") {
        cfg.burn_in = parse_size(value, where);
    } else if (key == "run.samples") {
        cfg.samples = parse_size(value, where);
    } else if (key == "run.lyapunov_steps") {
        cfg.lyapunov_steps = parse_size(value, where);
    } else if (key == "run.e0") {
        cfg.e0 = parse_double(value, where);
    } else if (key == "run.lambda0") {
        cfg.lambda0 = parse_double(value, where);
    } else if (key == "sweep.parameter") {
        if (!sweep_parameter_from(value))
            throw ConfigError(where + ": unknown sweep parameter '" + value + "'");
        cfg.sweep_parameter = value;
    } else if (key == "sweep.lo") {
        cfg.sweep_lo = parse_double(value, where);
    } else if (key == "sweep.hi") {
        cfg.sweep_hi = parse_double(value, where);
    } else if (key == "sweep.grid_points") {
        cfg.sweep_grid_points = parse_size(value, where);
    } else if (key == "sweep.continuation") {
        cfg.sweep_continuation = parse_bool(value, where);
    } else if (key == "fixed_points.grid_n") {
        cfg.fixed_points_grid_n = parse_size(value, where);
    } else if (key == "cobweb.steps") {
        cfg.cobweb_steps = parse_size(value, where);
    } else if (key == "cobweb.curve_grid_n") {
        cfg.cobweb_curve_grid_n = parse_size(value, where);
    } else if (key == "cs.kappas") {
        cfg.cs_kappas = parse_double_list(value, where);
    } else if (key == "tol.eps_den") {
        cfg.model.tol.eps_den = parse_double(value, where);
    } else if (key == "tol.eps_w") {
        cfg.model.tol.eps_w = parse_double(value, where);
    } else if (key == "tol.eps_kink") {
        cfg.model.tol.eps_kink = parse_double(value, where);
    } else if (key == "tol.fd_h_rel") {
        cfg.model.tol.fd_h_rel = parse_double(value, where);
    } else if (key == "output.dir") {
        cfg.output_dir = value;
    } else {
        throw ConfigError(where + ": unknown key '" + key + "'");
    }
}

inline std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t");
    std::size_t b = s.find_last_not_of(" \t\r");
    if (a == std::string::npos) return "";
    return s.substr(a, b - a + 1);
}

inline void parse_flat(RunConfig& cfg, std::istream& in, const std::string& origin) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string where = origin + ":" + std::to_string(line_no);
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const std::size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError(where + ": expected key=value, got '" + t + "'");
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key.empty()) throw ConfigError(where + ": empty key");
        apply_key(cfg, key, value, where);
    }
}

inline std::string json_scalar_to_string(const nlohmann::json& v, const std::string& where) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number()) return csv::format_double(v.get<double>());
    if (v.is_array()) {
        std::string out;
        for (const auto& item : v) {
            if (!item.is_number())
                throw ConfigError(where + ": array entries must be numbers");
            if (!out.empty()) out += ",";
            out += csv::format_double(item.get<double>());
        }
        return out;
    }
    throw ConfigError(where + ": expected a scalar value");
}

inline void parse_json(RunConfig& cfg, const std::string& text, const std::string& origin) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(origin + ": " + e.what());
    }
    if (!doc.is_object()) throw ConfigError(origin + ": top-level JSON value must be an object");
    for (auto it = doc.begin(); it != doc.end(); ++it) {
        const std::string where = origin + ":$." + it.key();
        if (it.value().is_object()) {
            for (auto jt = it.value().begin(); jt != it.value().end(); ++jt) {
                const std::string sub_where = where + "." + jt.key();
                apply_key(cfg, it.key() + "." + jt.key(),
                          json_scalar_to_string(jt.value(), sub_where), sub_where);
            }
        } else {
            apply_key(cfg, it.key(), json_scalar_to_string(it.value(), where), where);
        }
    }
}

} // namespace detail

inline void finalize(RunConfig& cfg) {
    if (!cfg.sigma_pi_explicit) cfg.model.sigma_pi = cfg.model.sigma;
    validate(cfg.model);
    validate(cfg.mix);
    if (!(cfg.e0 >= 0.0 && cfg.e0 <= cfg.model.domain_bound()))
        throw ConfigError("run.e0 must lie in [0, " + std::to_string(cfg.model.domain_bound()) +
                          "], got " + std::to_string(cfg.e0));
    if (!(cfg.lambda0 >= 0.0 && cfg.lambda0 <= 1.0))
        throw ConfigError("run.lambda0 must lie in [0,1], got " + std::to_string(cfg.lambda0));
    for (double k : cfg.cs_kappas)
        if (!(k >= 0.0))
            throw ConfigError("cs.kappas entries must be >= 0, got " + std::to_string(k));
}

// Load a config file; the format is detected from the first non-whitespace
// character ('{' selects the JSON object form).
inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    RunConfig cfg;
    const std::size_t first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
        detail::parse_json(cfg, text, path);
    } else {
        std::istringstream is(text);
        detail::parse_flat(cfg, is, path);
    }
    return cfg;
}

inline void apply_override(RunConfig& cfg, const std::string& assignment) {
    const std::size_t eq = assignment.find('=');
    if (eq == std::string::npos)
        throw ConfigError("--set expects key=value, got '" + assignment + "'");
    detail::apply_key(cfg, detail::trim(assignment.substr(0, eq)),
                      detail::trim(assignment.substr(eq + 1)), "--set " + assignment);
}

// Effective configuration echoed into every output header, in fixed order.
inline std::vector<std::string> effective_config_lines(const RunConfig& cfg) {
    std::vector<std::string> out;
    auto kv = [&out](const std::string& k, const std::string& v) { out.push_back(k + "=" + v); };
    auto kd = [&](const std::string& k, double v) { kv(k, csv::format_double(v)); };
    auto ki = [&](const std::string& k, std::size_t v) { kv(k, std::to_string(v)); };
    if (cfg.experiment) kv("experiment", to_string(*cfg.experiment));
    kd("model.income", cfg.model.income);
    kd("model.price_education", cfg.model.price_education);
    kd("model.price_consumption", cfg.model.price_consumption);
    kd("model.rho", cfg.model.rho);
    kd("model.rho_pi", cfg.model.rho_pi);
    kd("model.sigma", cfg.model.sigma);
    kd("model.sigma_pi", cfg.model.sigma_pi);
    kv("model.sigma_pi_tied", cfg.sigma_pi_explicit ? "false" : "true");
    kd("model.kappa", cfg.model.kappa);
    kd("model.pi_bar", cfg.model.pi_bar);
    kd("mix.lambda", cfg.mix.lambda);
    kd("mix.mu", cfg.mix.mu);
    kv("run.map", cfg.map == MapKind::OneD ? "1d" : "2d");
    ki("run.steps", cfg.steps);
    ki("run.burn_in", cfg.burn_in);
    ki("run.samples", cfg.samples);
    ki("run.lyapunov_steps", cfg.lyapunov_steps);
    kd("run.e0", cfg.e0);
    kd("run.lambda0", cfg.lambda0);
    kv("sweep.parameter", cfg.sweep_parameter);
    kd("sweep.lo", cfg.sweep_lo);
    kd("sweep.hi", cfg.sweep_hi);
    ki("sweep.grid_points", cfg.sweep_grid_points);
    kv("sweep.continuation", cfg.sweep_continuation ? "true" : "false");
    ki("fixed_points.grid_n", cfg.fixed_points_grid_n);
    ki("cobweb.steps", cfg.cobweb_steps);
    ki("cobweb.curve_grid_n", cfg.cobweb_curve_grid_n);
    if (!cfg.cs_kappas.empty()) {
        std::string list;
        for (double k : cfg.cs_kappas) {
            if (!list.empty()) list += ",";
            list += csv::format_double(k);
        }
        kv("cs.kappas", list);
    }
    kd("tol.eps_den", cfg.model.tol.eps_den);
    kd("tol.eps_w", cfg.model.tol.eps_w);
    kd("tol.eps_kink", cfg.model.tol.eps_kink);
    kd("tol.fd_h_rel", cfg.model.tol.fd_h_rel);
    // output.dir is deliberately not echoed: identical configs must produce
    // byte-identical files regardless of where they are written
    return out;
}

} // namespace edudyn
