#pragma once

// Experiment orchestration: dispatch a validated RunConfig to the matching
// module operation and write plot-ready CSV files. Every file starts with a
// header block echoing the artifact version and the full effective config, so
// identical configs produce byte-identical output.

#include <filesystem>
#include <string>
#include <vector>

#include "edudyn/analysis.hpp"
#include "edudyn/config.hpp"
#include "edudyn/csv.hpp"

namespace edudyn {

namespace detail {

inline csv::Writer make_writer(const RunConfig& cfg) {
    csv::Writer w;
    w.comment(std::string("edudyn ") + kVersion);
    for (const auto& line : effective_config_lines(cfg)) w.comment(line);
    return w;
}

inline std::string out_path(const RunConfig& cfg, const std::string& name) {
    std::filesystem::create_directories(cfg.output_dir);
    return (std::filesystem::path(cfg.output_dir) / name).string();
}

inline std::string run_simulate(const RunConfig& cfg) {
    csv::Writer w = make_writer(cfg);
    if (cfg.map == MapKind::OneD) {
        const Trajectory traj =
            iterate_1d(cfg.e0, cfg.mix.lambda, cfg.model, cfg.steps, cfg.burn_in);
        std::vector<double> tail(traj.states.begin() + static_cast<long>(cfg.burn_in),
                                 traj.states.begin() + static_cast<long>(cfg.burn_in + cfg.steps));
        w.comment("post_min=" + csv::format_double(attractor_bounds(tail).min));
        w.comment("post_max=" + csv::format_double(attractor_bounds(tail).max));
        w.comment("period=" + std::to_string(period_detect(tail)));
        w.columns({"t", "E"});
        for (std::size_t k = 0; k < tail.size(); ++k)
            w.row({csv::format_int(static_cast<long long>(cfg.burn_in + k)),
                   csv::format_double(tail[k])});
    } else {
        const Trajectory2D traj = iterate_2d({cfg.e0, cfg.lambda0}, cfg.model, cfg.mix.mu,
                                             cfg.steps, cfg.burn_in);
        std::vector<State2D> tail(traj.states.begin() + static_cast<long>(cfg.burn_in),
                                  traj.states.begin() + static_cast<long>(cfg.burn_in + cfg.steps));
        const Bounds2D b = attractor_bounds(tail);
        w.comment("post_min_E=" + csv::format_double(b.e.min));
        w.comment("post_max_E=" + csv::format_double(b.e.max));
        w.comment("post_min_lambda=" + csv::format_double(b.lambda.min));
        w.comment("post_max_lambda=" + csv::format_double(b.lambda.max));
        w.comment("period=" + std::to_string(period_detect(tail)));
        w.columns({"t", "E", "lambda"});
        for (std::size_t k = 0; k < tail.size(); ++k)
            w.row({csv::format_int(static_cast<long long>(cfg.burn_in + k)),
                   csv::format_double(tail[k].e), csv::format_double(tail[k].lambda)});
    }
    const std::string path = out_path(cfg, "simulate.csv");
    w.write(path);
    return path;
}

inline std::vector<std::string> run_cobweb(const RunConfig& cfg) {
    const CobwebPath path =
        cobweb(cfg.e0, cfg.mix.lambda, cfg.model, cfg.cobweb_steps, cfg.cobweb_curve_grid_n);
    csv::Writer wc = make_writer(cfg);
    wc.columns({"E", "gamma_E"});
    for (const auto& [e, g] : path.curve)
        wc.row({csv::format_double(e), csv::format_double(g)});
    const std::string curve_path = out_path(cfg, "cobweb_curve.csv");
    wc.write(curve_path);

    csv::Writer ws = make_writer(cfg);
    ws.columns({"seq", "x", "y"});
    for (std::size_t i = 0; i < path.staircase.size(); ++i)
        ws.row({csv::format_int(static_cast<long long>(i)),
                csv::format_double(path.staircase[i].first),
                csv::format_double(path.staircase[i].second)});
    const std::string stair_path = out_path(cfg, "cobweb_staircase.csv");
    ws.write(stair_path);
    return {curve_path, stair_path};
}

inline std::string run_fixed_points(const RunConfig& cfg) {
    csv::Writer w = make_writer(cfg);
    if (cfg.map == MapKind::OneD) {
        const ExistenceCondition cond = existence_condition(cfg.mix.lambda, cfg.model);
        w.comment(std::string("existence_case=") + to_string(cond.case_));
        w.comment("existence_S=" + csv::format_double(cond.s_value));
        w.comment("existence_lambda_bound=" + csv::format_double(cond.lambda_bound));
        if (!cond.warning.empty()) w.comment("existence_warning=" + cond.warning);
        const auto fps = fixed_points_1d(cfg.mix.lambda, cfg.model, cfg.fixed_points_grid_n);
        w.columns({"E_star", "gamma_prime", "class", "regime"});
        for (const FixedPoint1D& fp : fps)
            w.row({csv::format_double(fp.e_star), csv::format_double(fp.gamma_prime),
                   to_string(fp.classification), to_string(fp.regime)});
    } else {
        const auto fps = fixed_points_2d(cfg.model, cfg.mix.mu, cfg.fixed_points_grid_n);
        w.columns({"E_star", "lambda_star", "gamma_prime", "class", "regime"});
        for (const FixedPoint2D& fp : fps) {
            const double min_schur = std::min({std::fabs(fp.report.schur_1),
                                               std::fabs(fp.report.schur_2),
                                               std::fabs(fp.report.schur_3)});
            const char* cls = (min_schur <= cfg.model.tol.classification_band)
                                  ? "nonhyperbolic"
                                  : (fp.report.stable ? "stable" : "unstable");
            w.row({csv::format_double(fp.state.e), csv::format_double(fp.state.lambda),
                   csv::format_double(fp.report.jacobian.gamma_e), cls,
                   to_string(regime_of(fp.state.e, cfg.model))});
        }
    }
    const std::string path = out_path(cfg, "fixed_points.csv");
    w.write(path);
    return path;
}

inline std::string run_absorbing_interval(const RunConfig& cfg) {
    csv::Writer w = make_writer(cfg);
    const AbsorbingInterval j = absorbing_interval(cfg.mix.lambda, cfg.model);
    w.columns({"E_c", "E_min", "E_max", "unimodal_certified"});
    w.row({csv::format_double(j.e_c), csv::format_double(j.e_min), csv::format_double(j.e_max),
           j.unimodal_certified ? "1" : "0"});
    const std::string path = out_path(cfg, "absorbing_interval.csv");
    w.write(path);
    return path;
}

inline std::string run_bifurcate(const RunConfig& cfg) {
    SweepSpec spec;
    spec.map = cfg.map;
    spec.parameter = *sweep_parameter_from(cfg.sweep_parameter);
    spec.lo = cfg.sweep_lo;
    spec.hi = cfg.sweep_hi;
    spec.grid_points = cfg.sweep_grid_points;
    spec.burn_in = cfg.burn_in;
    spec.samples = cfg.samples;
    spec.lyapunov_steps = cfg.lyapunov_steps;
    spec.e0 = cfg.e0;
    spec.lambda0 = cfg.lambda0;
    spec.tie_sigma_pi = !cfg.sigma_pi_explicit;
    spec.continuation = cfg.sweep_continuation;
    const BifurcationDiagram d = bifurcation_sweep(spec, cfg.model, cfg.mix);

    csv::Writer w = make_writer(cfg);
    for (std::size_t i = 0; i < d.cells.size(); ++i)
        if (!d.cells[i].error.empty())
            w.comment("cell_error " + csv::format_double(d.grid[i]) + ": " + d.cells[i].error);
    const bool two_d = cfg.map == MapKind::TwoD;
    if (two_d)
        w.columns({"param_value", "sample_index", "state_value", "lambda_value", "lyapunov",
                   "period"});
    else
        w.columns({"param_value", "sample_index", "state_value", "lyapunov", "period"});
    for (std::size_t i = 0; i < d.cells.size(); ++i) {
        const SweepCell& c = d.cells[i];
        const std::string pv = csv::format_double(d.grid[i]);
        if (!c.error.empty()) {
            // error marker row: negative sample index, NaN samples, period -1
            std::vector<std::string> row{pv, "-1", "nan"};
            if (two_d) row.push_back("nan");
            row.push_back("nan");
            row.push_back("-1");
            w.row(std::move(row));
            continue;
        }
        for (std::size_t k = 0; k < c.samples_e.size(); ++k) {
            std::vector<std::string> row{pv, csv::format_int(static_cast<long long>(k)),
                                         csv::format_double(c.samples_e[k])};
            if (two_d) row.push_back(csv::format_double(c.samples_lambda[k]));
            row.push_back(csv::format_double(c.lyapunov));
            row.push_back(csv::format_int(c.period));
            w.row(std::move(row));
        }
    }
    const std::string path = out_path(cfg, "bifurcate.csv");
    w.write(path);
    return path;
}

inline std::string run_stability(const RunConfig& cfg) {
    csv::Writer w = make_writer(cfg);
    const auto fps = fixed_points_2d(cfg.model, cfg.mix.mu, cfg.fixed_points_grid_n);
    w.columns({"E_star", "lambda_star", "gamma_E", "gamma_lambda", "V_E", "trace", "det",
               "schur_1", "schur_2", "schur_3", "stable", "nearest_bifurcation",
               "nearest_residual", "mu_bar_at_point", "mu_bar_conservative"});
    for (const FixedPoint2D& fp : fps) {
        const StabilityReport& r = fp.report;
        w.row({csv::format_double(fp.state.e), csv::format_double(fp.state.lambda),
               csv::format_double(r.jacobian.gamma_e), csv::format_double(r.jacobian.gamma_lambda),
               csv::format_double(r.jacobian.v_e), csv::format_double(r.jacobian.trace),
               csv::format_double(r.jacobian.det), csv::format_double(r.schur_1),
               csv::format_double(r.schur_2), csv::format_double(r.schur_3),
               r.stable ? "1" : "0", to_string(r.nearest_bifurcation),
               csv::format_double(r.nearest_residual),
               csv::format_double(r.mu_threshold_at_point),
               csv::format_double(r.mu_threshold_conservative)});
    }
    const std::string path = out_path(cfg, "stability.csv");
    w.write(path);
    return path;
}

inline std::string run_mu_threshold(const RunConfig& cfg) {
    csv::Writer w = make_writer(cfg);
    const auto fps = fixed_points_2d(cfg.model, cfg.mix.mu, cfg.fixed_points_grid_n);
    w.columns({"E_star", "lambda_star", "g_star", "h_star", "g_hat", "h_hat",
               "mu_bar_at_point", "mu_bar_conservative", "unbounded"});
    for (const FixedPoint2D& fp : fps) {
        try {
            const MuThreshold mt = mu_threshold(fp.state, cfg.model);
            w.row({csv::format_double(fp.state.e), csv::format_double(fp.state.lambda),
                   csv::format_double(mt.g_star), csv::format_double(mt.h_star),
                   csv::format_double(mt.g_hat), csv::format_double(mt.h_hat),
                   csv::format_double(mt.mu_bar_at_point),
                   csv::format_double(mt.mu_bar_conservative), mt.unbounded ? "1" : "0"});
        } catch (const GStarNotBelowOne& e) {
            w.comment("skipped E_star=" + csv::format_double(fp.state.e) + ": " + e.what());
        }
    }
    const std::string path = out_path(cfg, "mu_threshold.csv");
    w.write(path);
    return path;
}

inline std::string run_comparative_statics(const RunConfig& cfg) {
    csv::Writer w = make_writer(cfg);
    w.columns({"kappa", "E_star", "gamma_prime", "dE_dkappa", "saturated"});
    std::vector<double> kappas = cfg.cs_kappas;
    if (kappas.empty()) kappas.push_back(cfg.model.kappa);
    for (double k : kappas) {
        ModelParams p = cfg.model;
        p.kappa = k;
        const auto fps = fixed_points_1d(cfg.mix.lambda, p, cfg.fixed_points_grid_n);
        for (const FixedPoint1D& fp : fps) {
            if (fp.classification != Classification::Stable) continue;
            try {
                const ComparativeStatics cs = comparative_statics_kappa(fp.e_star, cfg.mix.lambda, p);
                w.row({csv::format_double(k), csv::format_double(fp.e_star),
                       csv::format_double(fp.gamma_prime), csv::format_double(cs.de_dkappa),
                       cs.saturated ? "1" : "0"});
            } catch (const Error& e) {
                w.comment("kappa=" + csv::format_double(k) +
                          " E_star=" + csv::format_double(fp.e_star) + ": " + e.what());
            }
        }
    }
    const std::string path = out_path(cfg, "comparative_statics.csv");
    w.write(path);
    return path;
}

} // namespace detail

// Dispatch the configured experiment; returns the list of files written.
inline std::vector<std::string> run(const RunConfig& cfg) {
    if (!cfg.experiment) throw ConfigError("no experiment selected");
    switch (*cfg.experiment) {
        case Experiment::Simulate: return {detail::run_simulate(cfg)};
        case Experiment::Cobweb: return detail::run_cobweb(cfg);
        case Experiment::FixedPoints: return {detail::run_fixed_points(cfg)};
        case Experiment::AbsorbingInterval: return {detail::run_absorbing_interval(cfg)};
        case Experiment::Bifurcate: return {detail::run_bifurcate(cfg)};
        case Experiment::Stability: return {detail::run_stability(cfg)};
        case Experiment::MuThreshold: return {detail::run_mu_threshold(cfg)};
        case Experiment::ComparativeStatics: return {detail::run_comparative_statics(cfg)};
    }
    throw Error("unreachable experiment dispatch");
}

} // namespace edudyn
