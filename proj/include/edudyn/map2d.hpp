#pragma once

// The two-dimensional map with endogenous population structure:
//   E_{t+1}      = Gamma(E_t; lambda_t)
//   lambda_{t+1} = V(E_t) = exp(mu U_F) / (exp(mu U_F) + exp(mu U_P)),
// its Jacobian, Schur stability, bifurcation-curve residuals, and the mu
// threshold with conservative bounds.

#include <cmath>
#include <string>
#include <vector>

#include "edudyn/map1d.hpp"
#include "edudyn/model.hpp"

namespace edudyn {

struct State2D {
    double e = 0.0;
    double lambda = 0.0;
};

// lambda' as a numerically stable logistic of mu*(U_F - U_P); never overflows
// for large mu|U|.
inline double switch_share(double e, const ModelParams& p, double mu) {
    if (!(mu >= 0.0) || !std::isfinite(mu))
        throw DomainError("mu must be finite and >= 0, got " + std::to_string(mu));
    const IndirectUtility u = indirect_utility(e, p);
    const double d = mu * (u.u_f - u.u_p);
    if (d >= 0.0) return 1.0 / (1.0 + std::exp(-d));
    const double ed = std::exp(d);
    return ed / (1.0 + ed);
}

inline State2D phi_map(const State2D& s, const ModelParams& p, double mu) {
    return {gamma_map(s.e, s.lambda, p), switch_share(s.e, p, mu)};
}

struct Trajectory2D {
    std::vector<State2D> states;
    std::size_t burn_in = 0;
    State2D post_min{};  // coordinatewise extrema over states[burn_in..]
    State2D post_max{};
};

inline Trajectory2D iterate_2d(const State2D& s0, const ModelParams& p, double mu,
                               std::size_t n_steps, std::size_t burn_in) {
    check_enrolment_domain(s0.e, p);
    check_lambda(s0.lambda);
    Trajectory2D traj;
    traj.burn_in = burn_in;
    traj.states.reserve(burn_in + n_steps + 1);
    State2D s{clamp_enrolment(s0.e, p), s0.lambda};
    traj.states.push_back(s);
    for (std::size_t t = 0; t < burn_in + n_steps; ++t) {
        s = phi_map(s, p, mu);
        traj.states.push_back(s);
    }
    traj.post_min = traj.states[burn_in];
    traj.post_max = traj.states[burn_in];
    for (std::size_t t = burn_in; t < traj.states.size(); ++t) {
        traj.post_min.e = std::min(traj.post_min.e, traj.states[t].e);
        traj.post_min.lambda = std::min(traj.post_min.lambda, traj.states[t].lambda);
        traj.post_max.e = std::max(traj.post_max.e, traj.states[t].e);
        traj.post_max.lambda = std::max(traj.post_max.lambda, traj.states[t].lambda);
    }
    return traj;
}

struct Jacobian2D {
    double gamma_e = 0.0;
    double gamma_lambda = 0.0;
    double v_e = 0.0;
    double v_lambda = 0.0;  // identically zero: V has no lambda argument
    double trace = 0.0;     // = gamma_e
    double det = 0.0;       // = -gamma_lambda * v_e

    double spectral_radius() const {
        const double disc = trace * trace - 4.0 * det;
        if (disc >= 0.0) {
            const double rt = std::sqrt(disc);
            return std::max(std::fabs(0.5 * (trace + rt)), std::fabs(0.5 * (trace - rt)));
        }
        return std::sqrt(det);  // complex pair: |eig|^2 = det
    }
};

// Map Jacobian at a point:
//   [ Gamma_E  Gamma_lambda ]      Gamma_lambda = (I/p_e)(s_F - s_P)
//   [ V_E      0            ]      V_E = mu V(1-V)(U_{F,E} - U_{P,E})
inline Jacobian2D jacobian_2d(const State2D& s, const ModelParams& p, double mu) {
    check_enrolment_domain(s.e, p);
    check_lambda(s.lambda);
    Jacobian2D j;
    const SharesDerivative sd = shares_derivative_e(s.e, p);
    const TypeShares sh = type_shares(s.e, p);
    const double ebar = p.domain_bound();
    j.gamma_e = ebar * (s.lambda * sd.ds_f + (1.0 - s.lambda) * sd.ds_p);
    j.gamma_lambda = ebar * (sh.s_f - sh.s_p);
    const UtilityDerivative ud = utility_derivative_e(s.e, p);
    const double v = switch_share(s.e, p, mu);
    j.v_e = mu * v * (1.0 - v) * (ud.du_f - ud.du_p);
    j.v_lambda = 0.0;
    j.trace = j.gamma_e;
    j.det = -j.gamma_lambda * j.v_e;
    return j;
}

enum class BifurcationCurve { SaddleNode, Flip, NeimarkSacker, None };

inline const char* to_string(BifurcationCurve c) {
    switch (c) {
        case BifurcationCurve::SaddleNode: return "saddle-node";
        case BifurcationCurve::Flip: return "flip";
        case BifurcationCurve::NeimarkSacker: return "neimark-sacker";
        default: return "none";
    }
}

struct MuThreshold {
    double mu_bar_at_point = 0.0;      // (4 p_e / I)(1 - g*) / h*
    double mu_bar_conservative = 0.0;  // same with upper bounds g_hat >= g*, h_hat >= h*
    double g_star = 0.0;               // |Gamma_E| at the fixed point
    double h_star = 0.0;               // |U_{F,E} - U_{P,E}| at the fixed point
    double g_hat = 0.0;
    double h_hat = 0.0;
    bool unbounded = false;            // h* ~ 0: any mu preserves stability
};

// Stability margin in mu at an interior fixed point. The conservative variant
// replaces g*, h* by computable upper bounds: g_hat from the share-derivative
// bound (I/p_e)(lambda|s_F'| + (1-lambda)|s_P'|) (sign cancellations between
// the branches are given up, so g_hat can exceed 1 and the conservative
// threshold degenerate to 0), h_hat from the triangle inequality with the
// shares' log terms bounded over a domain grid (the fixed point itself is
// always included in the grid, which makes h_hat >= h* unconditional).
inline MuThreshold mu_threshold(const State2D& s_star, const ModelParams& p,
                                std::size_t bound_grid_n = 512) {
    MuThreshold out;
    const MapDerivative ge = gamma_derivative_e(s_star.e, s_star.lambda, p);
    out.g_star = std::fabs(ge.value);
    if (out.g_star >= 1.0)
        throw GStarNotBelowOne("|Gamma_E| = " + std::to_string(out.g_star) +
                               " >= 1 at the fixed point");
    const UtilityDerivative ud = utility_derivative_e(s_star.e, p);
    out.h_star = std::fabs(ud.du_f - ud.du_p);
    const double scale = 4.0 * p.price_education / p.income;
    if (out.h_star <= 1e-14) {
        out.unbounded = true;
        out.mu_bar_at_point = std::numeric_limits<double>::infinity();
        out.mu_bar_conservative = std::numeric_limits<double>::infinity();
        return out;
    }
    out.mu_bar_at_point = scale * (1.0 - out.g_star) / out.h_star;

    const SharesDerivative sd = shares_derivative_e(s_star.e, p);
    out.g_hat = p.domain_bound() * (s_star.lambda * std::fabs(sd.ds_f) +
                                    (1.0 - s_star.lambda) * std::fabs(sd.ds_p));

    // h_hat = sum_i |alpha_i'| max|log(s_i I/p_e)| + |beta_i'| max|log((1-s_i) I/p_c)|
    // with the max taken over a domain grid plus the fixed point.
    const PreferenceWeights dw = weights_derivative_e(s_star.e, p);
    const double ebar = p.domain_bound();
    double le_f = 0.0, lc_f = 0.0, le_p = 0.0, lc_p = 0.0;
    auto absorb = [&](double e) {
        TypeShares sh;
        try {
            sh = type_shares(e, p);
        } catch (const DegenerateWeights&) {
            return;
        }
        auto upd = [](double& acc, double x) {
            if (x > 0.0) acc = std::max(acc, std::fabs(std::log(x)));
        };
        upd(le_f, sh.s_f * p.income / p.price_education);
        upd(lc_f, (1.0 - sh.s_f) * p.income / p.price_consumption);
        upd(le_p, sh.s_p * p.income / p.price_education);
        upd(lc_p, (1.0 - sh.s_p) * p.income / p.price_consumption);
    };
    for (std::size_t i = 1; i < bound_grid_n; ++i)
        absorb(ebar * static_cast<double>(i) / static_cast<double>(bound_grid_n));
    absorb(s_star.e);
    out.h_hat = std::fabs(dw.alpha_f) * le_f + std::fabs(dw.beta_f) * lc_f +
                std::fabs(dw.alpha_p) * le_p + std::fabs(dw.beta_p) * lc_p;

    const double headroom = std::max(0.0, 1.0 - out.g_hat);
    out.mu_bar_conservative =
        (out.h_hat > 0.0) ? scale * headroom / out.h_hat : out.mu_bar_at_point;
    // Larger bounds can only shrink the threshold.
    out.mu_bar_conservative = std::min(out.mu_bar_conservative, out.mu_bar_at_point);
    return out;
}

struct StabilityReport {
    Jacobian2D jacobian;
    double schur_1 = 0.0;  // 1 - tau + Delta
    double schur_2 = 0.0;  // 1 + tau + Delta
    double schur_3 = 0.0;  // 1 - Delta
    bool stable = false;
    BifurcationCurve nearest_bifurcation = BifurcationCurve::None;
    double nearest_residual = 0.0;
    double mu_threshold_at_point = std::numeric_limits<double>::quiet_NaN();
    double mu_threshold_conservative = std::numeric_limits<double>::quiet_NaN();
    bool mu_threshold_unbounded = false;
};

// Schur-Cohn verdict at a fixed point of the map, with the residual of the
// nearest codimension-one bifurcation curve and the mu thresholds.
inline StabilityReport schur_stability(const State2D& s_star, const ModelParams& p, double mu) {
    const State2D image = phi_map(s_star, p, mu);
    const double res_e = std::fabs(image.e - s_star.e);
    const double res_l = std::fabs(image.lambda - s_star.lambda);
    if (res_e > p.tol.fixed_point_residual || res_l > p.tol.fixed_point_residual)
        throw NotAFixedPoint("residual (" + std::to_string(res_e) + ", " + std::to_string(res_l) +
                             ") exceeds " + std::to_string(p.tol.fixed_point_residual));
    StabilityReport rep;
    rep.jacobian = jacobian_2d(s_star, p, mu);
    const double tau = rep.jacobian.trace;
    const double delta = rep.jacobian.det;
    rep.schur_1 = 1.0 - tau + delta;
    rep.schur_2 = 1.0 + tau + delta;
    rep.schur_3 = 1.0 - delta;
    rep.stable = rep.schur_1 > p.tol.schur && rep.schur_2 > p.tol.schur &&
                 rep.schur_3 > p.tol.schur;

    rep.nearest_bifurcation = BifurcationCurve::SaddleNode;
    rep.nearest_residual = std::fabs(rep.schur_1);
    if (std::fabs(rep.schur_2) < rep.nearest_residual) {
        rep.nearest_bifurcation = BifurcationCurve::Flip;
        rep.nearest_residual = std::fabs(rep.schur_2);
    }
    if (tau > -2.0 && tau < 2.0 && std::fabs(rep.schur_3) < rep.nearest_residual) {
        rep.nearest_bifurcation = BifurcationCurve::NeimarkSacker;
        rep.nearest_residual = std::fabs(rep.schur_3);
    }

    try {
        const MuThreshold mt = mu_threshold(s_star, p);
        rep.mu_threshold_at_point = mt.mu_bar_at_point;
        rep.mu_threshold_conservative = mt.mu_bar_conservative;
        rep.mu_threshold_unbounded = mt.unbounded;
    } catch (const GStarNotBelowOne&) {
        // thresholds stay NaN: no stability margin exists at this point
    } catch (const ShareAtBoundary&) {
    } catch (const KinkProximity&) {
    }
    return rep;
}

struct FixedPoint2D {
    State2D state;
    StabilityReport report;
};

// Fixed points of the 2-D map. V does not depend on lambda, so lambda* = V(E*)
// exactly and the search reduces to a 1-D scan of R(E) = Gamma(E; V(E)) - E.
inline std::vector<FixedPoint2D> fixed_points_2d(const ModelParams& p, double mu,
                                                 std::size_t grid_n = 2000) {
    if (grid_n < 200) grid_n = 200;
    const double ebar = p.domain_bound();
    auto residual = [&](double e) { return gamma_map(e, switch_share(e, p, mu), p) - e; };

    std::vector<double> roots;
    bool have_prev = false;
    double prev_e = 0.0, prev_f = 0.0;
    for (std::size_t i = 0; i <= grid_n; ++i) {
        const double e = ebar * static_cast<double>(i) / static_cast<double>(grid_n);
        double f;
        try {
            f = residual(e);
        } catch (const Error&) {
            have_prev = false;  // degenerate node: do not bracket across it
            continue;
        }
        if (f == 0.0) {
            roots.push_back(e);
        } else if (have_prev && (prev_f < 0.0) != (f < 0.0) && prev_f != 0.0) {
            roots.push_back(detail::bisect(residual, prev_e, e, prev_f, 1e-12));
        }
        prev_e = e;
        prev_f = f;
        have_prev = true;
    }
    std::sort(roots.begin(), roots.end());
    std::vector<double> dedup;
    for (double r : roots)
        if (dedup.empty() || r - dedup.back() > p.tol.root_dedup) dedup.push_back(r);

    std::vector<FixedPoint2D> out;
    for (double r : dedup) {
        FixedPoint2D fp;
        fp.state = {r, switch_share(r, p, mu)};
        try {
            fp.report = schur_stability(fp.state, p, mu);
        } catch (const Error&) {
            continue;  // kink or boundary-share point: no report possible
        }
        out.push_back(fp);
    }
    return out;
}

} // namespace edudyn
