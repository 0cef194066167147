#pragma once

// Orbit diagnostics and experiment drivers: the shared finite-difference
// oracle, period detection, Lyapunov exponents, cobweb paths, attractor
// bounds, and bifurcation sweeps (1-D and 2-D) with deterministic parallel
// cell execution.

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "edudyn/map1d.hpp"
#include "edudyn/map2d.hpp"

namespace edudyn {

struct FdEstimate {
    double value = 0.0;
    double error_estimate = 0.0;
};

// Central difference with Richardson step-halving: the h/2 estimate is
// returned, its leading truncation error is |D(h) - D(h/2)|/3, and a
// cancellation-roundoff term is added to keep the estimate honest.
template <typename F>
FdEstimate finite_difference(F&& f, double x, double h_rel = 1e-6) {
    const double h = h_rel * std::max(1.0, std::fabs(x));
    const double h2 = 0.5 * h;
    const double d_h = (f(x + h) - f(x - h)) / (2.0 * h);
    const double fp = f(x + h2), fm = f(x - h2);
    const double d_h2 = (fp - fm) / (2.0 * h2);
    FdEstimate out;
    out.value = d_h2;
    const double eps = std::numeric_limits<double>::epsilon();
    out.error_estimate = std::fabs(d_h - d_h2) / 3.0 +
                         eps * (std::fabs(fp) + std::fabs(fm)) / (2.0 * h2) +
                         eps * std::fabs(d_h2);
    return out;
}

// Smallest p <= max_period such that every lag-p difference over the tail is
// within tol; 0 means aperiodic. Pass a projection for non-scalar states.
template <typename State, typename Diff>
int period_detect(const std::vector<State>& tail, Diff&& diff, int max_period = 64,
                  double tol = 1e-8) {
    const std::size_t n = tail.size();
    for (int p = 1; p <= max_period; ++p) {
        const std::size_t lag = static_cast<std::size_t>(p);
        if (n < 2 * lag) break;
        bool ok = true;
        for (std::size_t t = 0; t + lag < n; ++t) {
            if (diff(tail[t + lag], tail[t]) > tol) {
                ok = false;
                break;
            }
        }
        if (ok) return p;
    }
    return 0;
}

inline int period_detect(const std::vector<double>& tail, int max_period = 64,
                         double tol = 1e-8) {
    return period_detect(tail, [](double a, double b) { return std::fabs(a - b); },
                         max_period, tol);
}

inline int period_detect(const std::vector<State2D>& tail, int max_period = 64,
                         double tol = 1e-8) {
    return period_detect(
        tail,
        [](const State2D& a, const State2D& b) {
            return std::max(std::fabs(a.e - b.e), std::fabs(a.lambda - b.lambda));
        },
        max_period, tol);
}

struct LyapunovEstimate {
    double exponent = 0.0;
    std::size_t fallback_count = 0;  // steps where the analytic derivative was refused
};

// (1/n) sum of log|Gamma'(E_t)| along the post-burn-in orbit.
inline LyapunovEstimate lyapunov_1d(double e0, double lambda, const ModelParams& p,
                                    std::size_t n = 10000, std::size_t burn_in = 2000) {
    LyapunovEstimate out;
    double e = clamp_enrolment(e0, p);
    for (std::size_t t = 0; t < burn_in; ++t) e = gamma_map(e, lambda, p);
    double acc = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        const MapDerivative d = gamma_derivative_e(e, lambda, p);
        if (!d.analytic) ++out.fallback_count;
        acc += std::log(std::max(std::fabs(d.value), 1e-300));
        e = gamma_map(e, lambda, p);
    }
    out.exponent = acc / static_cast<double>(n);
    return out;
}

// Finite-difference Jacobian of phi; oracle for the analytic entries and
// fallback for kink-adjacent states.
inline Jacobian2D fd_jacobian_2d(const State2D& s, const ModelParams& p, double mu,
                                 double h_rel = 1e-7) {
    const double ebar = p.domain_bound();
    const double he = h_rel * std::max(1.0, std::fabs(s.e));
    const double elo = std::max(0.0, s.e - he), ehi = std::min(ebar, s.e + he);
    const double hl = h_rel;
    const double llo = std::max(0.0, s.lambda - hl), lhi = std::min(1.0, s.lambda + hl);
    Jacobian2D j;
    j.gamma_e = (gamma_map(ehi, s.lambda, p) - gamma_map(elo, s.lambda, p)) / (ehi - elo);
    j.gamma_lambda = (gamma_map(s.e, lhi, p) - gamma_map(s.e, llo, p)) / (lhi - llo);
    j.v_e = (switch_share(ehi, p, mu) - switch_share(elo, p, mu)) / (ehi - elo);
    j.v_lambda = 0.0;
    j.trace = j.gamma_e;
    j.det = -j.gamma_lambda * j.v_e;
    return j;
}

// Largest exponent from Jacobian products applied to a unit vector, with
// renormalization every 10 steps.
inline LyapunovEstimate lyapunov_2d(const State2D& s0, const ModelParams& p, double mu,
                                    std::size_t n = 10000, std::size_t burn_in = 2000) {
    LyapunovEstimate out;
    State2D s{clamp_enrolment(s0.e, p), s0.lambda};
    for (std::size_t t = 0; t < burn_in; ++t) s = phi_map(s, p, mu);
    double vx = 1.0, vy = 0.0, acc = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        Jacobian2D j;
        try {
            j = jacobian_2d(s, p, mu);
        } catch (const Error&) {
            j = fd_jacobian_2d(s, p, mu);
            ++out.fallback_count;
        }
        const double nx = j.gamma_e * vx + j.gamma_lambda * vy;
        const double ny = j.v_e * vx;
        vx = nx;
        vy = ny;
        if ((t + 1) % 10 == 0) {
            const double norm = std::hypot(vx, vy);
            acc += std::log(std::max(norm, 1e-300));
            if (norm > 0.0) {
                vx /= norm;
                vy /= norm;
            } else {
                vx = 1.0;
                vy = 0.0;
            }
        }
        s = phi_map(s, p, mu);
    }
    const double norm = std::hypot(vx, vy);
    if (norm > 0.0) acc += std::log(norm);
    out.exponent = acc / static_cast<double>(n);
    return out;
}

struct Bounds1D {
    double min = 0.0;
    double max = 0.0;
};

inline Bounds1D attractor_bounds(const std::vector<double>& tail) {
    if (tail.empty()) throw DomainError("attractor_bounds: empty orbit tail");
    Bounds1D b{tail.front(), tail.front()};
    for (double v : tail) {
        b.min = std::min(b.min, v);
        b.max = std::max(b.max, v);
    }
    return b;
}

struct Bounds2D {
    Bounds1D e;
    Bounds1D lambda;
};

inline Bounds2D attractor_bounds(const std::vector<State2D>& tail) {
    if (tail.empty()) throw DomainError("attractor_bounds: empty orbit tail");
    Bounds2D b{{tail.front().e, tail.front().e}, {tail.front().lambda, tail.front().lambda}};
    for (const State2D& s : tail) {
        b.e.min = std::min(b.e.min, s.e);
        b.e.max = std::max(b.e.max, s.e);
        b.lambda.min = std::min(b.lambda.min, s.lambda);
        b.lambda.max = std::max(b.lambda.max, s.lambda);
    }
    return b;
}

struct CobwebPath {
    std::vector<std::pair<double, double>> curve;      // (E, Gamma(E)) on a dense grid
    std::vector<std::pair<double, double>> staircase;  // axis-aligned iteration path
};

inline CobwebPath cobweb(double e0, double lambda, const ModelParams& p,
                         std::size_t n_steps, std::size_t curve_grid_n = 2000) {
    check_enrolment_domain(e0, p);
    CobwebPath path;
    const double ebar = p.domain_bound();
    path.curve.reserve(curve_grid_n + 1);
    for (std::size_t i = 0; i <= curve_grid_n; ++i) {
        const double e = ebar * static_cast<double>(i) / static_cast<double>(curve_grid_n);
        path.curve.emplace_back(e, gamma_map(e, lambda, p));
    }
    double e = clamp_enrolment(e0, p);
    path.staircase.reserve(2 * n_steps + 1);
    path.staircase.emplace_back(e, e);
    for (std::size_t t = 0; t < n_steps; ++t) {
        const double next = gamma_map(e, lambda, p);
        path.staircase.emplace_back(e, next);
        path.staircase.emplace_back(next, next);
        e = next;
    }
    return path;
}

enum class SweepParameter { Rho, RhoPi, Sigma, SigmaPi, Kappa, Lambda, Mu, PiBar };

inline const char* to_string(SweepParameter sp) {
    switch (sp) {
        case SweepParameter::Rho: return "rho";
        case SweepParameter::RhoPi: return "rho_pi";
        case SweepParameter::Sigma: return "sigma";
        case SweepParameter::SigmaPi: return "sigma_pi";
        case SweepParameter::Kappa: return "kappa";
        case SweepParameter::Lambda: return "lambda";
        case SweepParameter::Mu: return "mu";
        default: return "pi_bar";
    }
}

inline std::optional<SweepParameter> sweep_parameter_from(const std::string& name) {
    if (name == "rho") return SweepParameter::Rho;
    if (name == "rho_pi") return SweepParameter::RhoPi;
    if (name == "sigma") return SweepParameter::Sigma;
    if (name == "sigma_pi") return SweepParameter::SigmaPi;
    if (name == "kappa") return SweepParameter::Kappa;
    if (name == "lambda") return SweepParameter::Lambda;
    if (name == "mu") return SweepParameter::Mu;
    if (name == "pi_bar") return SweepParameter::PiBar;
    return std::nullopt;
}

enum class MapKind { OneD, TwoD };

struct SweepSpec {
    MapKind map = MapKind::OneD;
    SweepParameter parameter = SweepParameter::Sigma;
    double lo = 0.0;
    double hi = 20.0;
    std::size_t grid_points = 1000;
    std::size_t burn_in = 2000;
    std::size_t samples = 300;
    std::size_t lyapunov_steps = 10000;
    double e0 = 0.3;
    double lambda0 = 0.5;
    bool tie_sigma_pi = true;   // sweeping sigma moves sigma_pi with it
    bool continuation = false;  // warm-start each cell from the previous cell
    unsigned threads = 0;       // 0: EDUDYN_THREADS or hardware concurrency
};

struct SweepCell {
    double parameter_value = 0.0;
    std::vector<double> samples_e;
    std::vector<double> samples_lambda;  // filled for 2-D sweeps
    double lyapunov = std::numeric_limits<double>::quiet_NaN();
    int period = 0;  // 0 = aperiodic
    std::string error;
};

struct BifurcationDiagram {
    SweepSpec spec;
    std::vector<double> grid;
    std::vector<SweepCell> cells;
};

inline void apply_sweep_parameter(ModelParams& p, PopulationMix& mix, SweepParameter sp,
                                  double value, bool tie_sigma_pi) {
    switch (sp) {
        case SweepParameter::Rho: p.rho = value; break;
        case SweepParameter::RhoPi: p.rho_pi = value; break;
        case SweepParameter::Sigma:
            p.sigma = value;
            if (tie_sigma_pi) p.sigma_pi = value;
            break;
        case SweepParameter::SigmaPi: p.sigma_pi = value; break;
        case SweepParameter::Kappa: p.kappa = value; break;
        case SweepParameter::Lambda: mix.lambda = value; break;
        case SweepParameter::Mu: mix.mu = value; break;
        case SweepParameter::PiBar: p.pi_bar = value; break;
    }
}

namespace detail {

inline unsigned resolve_threads(unsigned requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("EDUDYN_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return static_cast<unsigned>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

inline void run_sweep_cell(SweepCell& cell, const SweepSpec& spec, const ModelParams& base,
                           const PopulationMix& base_mix, double value, double e_start,
                           double lambda_start) {
    cell.parameter_value = value;
    ModelParams p = base;
    PopulationMix mix = base_mix;
    apply_sweep_parameter(p, mix, spec.parameter, value, spec.tie_sigma_pi);
    try {
        validate(p);
        validate(mix);
        const std::size_t n = std::max(spec.samples, spec.lyapunov_steps);
        if (spec.map == MapKind::OneD) {
            double e = clamp_enrolment(e_start, p);
            for (std::size_t t = 0; t < spec.burn_in; ++t) e = gamma_map(e, mix.lambda, p);
            cell.samples_e.reserve(spec.samples);
            double acc = 0.0;
            for (std::size_t t = 0; t < n; ++t) {
                if (t < spec.samples) cell.samples_e.push_back(e);
                const MapDerivative d = gamma_derivative_e(e, mix.lambda, p);
                acc += std::log(std::max(std::fabs(d.value), 1e-300));
                e = gamma_map(e, mix.lambda, p);
            }
            cell.lyapunov = acc / static_cast<double>(n);
            cell.period = period_detect(cell.samples_e);
        } else {
            State2D s{clamp_enrolment(e_start, p), lambda_start};
            for (std::size_t t = 0; t < spec.burn_in; ++t) s = phi_map(s, p, mix.mu);
            const State2D lyap_start = s;
            std::vector<State2D> tail;
            tail.reserve(spec.samples);
            for (std::size_t t = 0; t < spec.samples; ++t) {
                tail.push_back(s);
                s = phi_map(s, p, mix.mu);
            }
            cell.samples_e.reserve(tail.size());
            cell.samples_lambda.reserve(tail.size());
            for (const State2D& st : tail) {
                cell.samples_e.push_back(st.e);
                cell.samples_lambda.push_back(st.lambda);
            }
            cell.lyapunov = lyapunov_2d(lyap_start, p, mix.mu, spec.lyapunov_steps, 0).exponent;
            cell.period = period_detect(tail);
        }
    } catch (const Error& err) {
        cell.error = err.what();
        cell.samples_e.clear();
        cell.samples_lambda.clear();
        cell.lyapunov = std::numeric_limits<double>::quiet_NaN();
        cell.period = 0;
    }
}

} // namespace detail

// Bifurcation sweep over an inclusive uniform parameter grid. Cells are
// mutually independent (cold starts) unless continuation is requested, and
// are assembled in grid order regardless of the worker count.
inline BifurcationDiagram bifurcation_sweep(const SweepSpec& spec, const ModelParams& base,
                                            const PopulationMix& base_mix) {
    if (spec.grid_points < 2)
        throw ConfigError("sweep grid_points must be >= 2, got " +
                          std::to_string(spec.grid_points));
    if (spec.map == MapKind::OneD && spec.parameter == SweepParameter::Mu)
        throw ConfigError("mu is not a parameter of the one-dimensional map");
    if (spec.map == MapKind::TwoD && spec.parameter == SweepParameter::Lambda)
        throw ConfigError("lambda is a state variable of the two-dimensional map, not a parameter");
    if (!(spec.hi >= spec.lo))
        throw ConfigError("sweep range is empty: hi < lo");

    BifurcationDiagram diagram;
    diagram.spec = spec;
    diagram.grid.resize(spec.grid_points);
    diagram.cells.resize(spec.grid_points);
    for (std::size_t i = 0; i < spec.grid_points; ++i)
        diagram.grid[i] = spec.lo + (spec.hi - spec.lo) * static_cast<double>(i) /
                                        static_cast<double>(spec.grid_points - 1);

    if (spec.continuation) {
        // warm starts are sequential by construction
        double e_start = spec.e0, lambda_start = spec.lambda0;
        for (std::size_t i = 0; i < spec.grid_points; ++i) {
            detail::run_sweep_cell(diagram.cells[i], spec, base, base_mix, diagram.grid[i],
                                   e_start, lambda_start);
            if (diagram.cells[i].error.empty() && !diagram.cells[i].samples_e.empty()) {
                e_start = diagram.cells[i].samples_e.back();
                if (!diagram.cells[i].samples_lambda.empty())
                    lambda_start = diagram.cells[i].samples_lambda.back();
            }
        }
        return diagram;
    }

    const unsigned threads = std::min<unsigned>(detail::resolve_threads(spec.threads),
                                                static_cast<unsigned>(spec.grid_points));
    if (threads <= 1) {
        for (std::size_t i = 0; i < spec.grid_points; ++i)
            detail::run_sweep_cell(diagram.cells[i], spec, base, base_mix, diagram.grid[i],
                                   spec.e0, spec.lambda0);
        return diagram;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= spec.grid_points) return;
            detail::run_sweep_cell(diagram.cells[i], spec, base, base_mix, diagram.grid[i],
                                   spec.e0, spec.lambda0);
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    return diagram;
}

// Boundary between the first adjacent (period 1, period 2) cell pair; the
// detected flip is reported at the midpoint of the two grid values.
inline std::optional<double> first_flip(const BifurcationDiagram& d) {
    for (std::size_t i = 0; i + 1 < d.cells.size(); ++i) {
        if (d.cells[i].error.empty() && d.cells[i + 1].error.empty() &&
            d.cells[i].period == 1 && d.cells[i + 1].period == 2)
            return 0.5 * (d.grid[i] + d.grid[i + 1]);
    }
    return std::nullopt;
}

// Detected periods with aperiodic and error cells dropped, consecutive
// duplicates collapsed. A clean single flip compresses to {1, 2}.
inline std::vector<int> compressed_period_sequence(const BifurcationDiagram& d) {
    std::vector<int> out;
    for (const SweepCell& c : d.cells) {
        if (!c.error.empty() || c.period == 0) continue;
        if (out.empty() || out.back() != c.period) out.push_back(c.period);
    }
    return out;
}

} // namespace edudyn
