#pragma once

// The one-dimensional aggregate-enrolment map
//   Gamma(E; lambda) = (I/p_e) [ lambda s_F(E) + (1-lambda) s_P(E) ],
// its orbits, fixed points, existence condition, critical points, absorbing
// interval, and comparative statics in kappa.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "edudyn/model.hpp"

namespace edudyn {

inline void check_lambda(double lambda) {
    if (!(lambda >= 0.0 && lambda <= 1.0))
        throw DomainError("lambda=" + std::to_string(lambda) + " outside [0,1]");
}

inline double gamma_map(double e, double lambda, const ModelParams& p) {
    check_lambda(lambda);
    const TypeShares s = type_shares(e, p);
    return p.domain_bound() * (lambda * s.s_f + (1.0 - lambda) * s.s_p);
}

struct MapDerivative {
    double value = 0.0;
    bool analytic = true;  // false: central-difference fallback near the kink
};

// Gamma_E, analytic in smooth regimes, finite-difference fallback at the kink.
inline MapDerivative gamma_derivative_e(double e, double lambda, const ModelParams& p) {
    check_lambda(lambda);
    try {
        const SharesDerivative d = shares_derivative_e(e, p);
        return {p.domain_bound() * (lambda * d.ds_f + (1.0 - lambda) * d.ds_p), true};
    } catch (const KinkProximity&) {
        const double ebar = p.domain_bound();
        const double h = p.tol.fd_h_rel * std::max(1.0, std::fabs(e));
        const double lo = std::max(0.0, e - h), hi = std::min(ebar, e + h);
        return {(gamma_map(hi, lambda, p) - gamma_map(lo, lambda, p)) / (hi - lo), false};
    }
}

struct Trajectory {
    std::vector<double> states;  // E_0 ... E_{burn_in + n_steps}
    std::size_t burn_in = 0;
    double post_min = 0.0;  // extrema over states[burn_in..]
    double post_max = 0.0;
};

inline Trajectory iterate_1d(double e0, double lambda, const ModelParams& p,
                             std::size_t n_steps, std::size_t burn_in) {
    check_enrolment_domain(e0, p);
    Trajectory traj;
    traj.burn_in = burn_in;
    traj.states.reserve(burn_in + n_steps + 1);
    double e = clamp_enrolment(e0, p);
    traj.states.push_back(e);
    for (std::size_t t = 0; t < burn_in + n_steps; ++t) {
        e = gamma_map(e, lambda, p);
        traj.states.push_back(e);
    }
    traj.post_min = *std::min_element(traj.states.begin() + static_cast<long>(burn_in),
                                      traj.states.end());
    traj.post_max = *std::max_element(traj.states.begin() + static_cast<long>(burn_in),
                                      traj.states.end());
    return traj;
}

enum class Classification { Stable, Unstable, Nonhyperbolic };

inline const char* to_string(Classification c) {
    switch (c) {
        case Classification::Stable: return "stable";
        case Classification::Unstable: return "unstable";
        default: return "nonhyperbolic";
    }
}

struct FixedPoint1D {
    double e_star = 0.0;
    double gamma_prime = 0.0;
    bool gamma_prime_analytic = true;
    Classification classification = Classification::Stable;
    Regime regime = Regime::Interior;
};

inline Classification classify_multiplier(double gp, double band) {
    const double mag = std::fabs(gp);
    if (mag < 1.0 - band) return Classification::Stable;
    if (mag > 1.0 + band) return Classification::Unstable;
    return Classification::Nonhyperbolic;
}

namespace detail {

// Bisection on f over a sign-change bracket [a,b] down to width <= width_tol.
template <typename F>
double bisect(F&& f, double a, double b, double fa, double width_tol) {
    for (int it = 0; it < 200 && (b - a) > width_tol; ++it) {
        const double m = 0.5 * (a + b);
        const double fm = f(m);
        if (fm == 0.0) return m;
        if ((fa < 0.0) != (fm < 0.0)) {
            b = m;
        } else {
            a = m;
            fa = fm;
        }
    }
    return 0.5 * (a + b);
}

} // namespace detail

// Sign-change scan of Gamma(E)-E over a uniform grid, bisection refinement to
// interval width 1e-12, dedup radius tol.root_dedup.
inline std::vector<FixedPoint1D> fixed_points_1d(double lambda, const ModelParams& p,
                                                 std::size_t grid_n = 4000) {
    check_lambda(lambda);
    if (grid_n < 1000) grid_n = 1000;
    const double ebar = p.domain_bound();
    auto residual = [&](double e) { return gamma_map(e, lambda, p) - e; };

    std::vector<double> roots;
    double prev_e = 0.0;
    double prev_f = residual(prev_e);
    if (prev_f == 0.0) roots.push_back(prev_e);
    for (std::size_t i = 1; i <= grid_n; ++i) {
        const double e = ebar * static_cast<double>(i) / static_cast<double>(grid_n);
        const double f = residual(e);
        if (f == 0.0) {
            roots.push_back(e);
        } else if ((prev_f < 0.0) != (f < 0.0) && prev_f != 0.0) {
            roots.push_back(detail::bisect(residual, prev_e, e, prev_f, 1e-12));
        }
        prev_e = e;
        prev_f = f;
    }
    std::sort(roots.begin(), roots.end());
    std::vector<double> dedup;
    for (double r : roots)
        if (dedup.empty() || r - dedup.back() > p.tol.root_dedup) dedup.push_back(r);

    std::vector<FixedPoint1D> out;
    out.reserve(dedup.size());
    for (double r : dedup) {
        FixedPoint1D fp;
        fp.e_star = r;
        const MapDerivative d = gamma_derivative_e(r, lambda, p);
        fp.gamma_prime = d.value;
        fp.gamma_prime_analytic = d.analytic;
        fp.classification = classify_multiplier(d.value, p.tol.classification_band);
        fp.regime = regime_of(r, p);
        out.push_back(fp);
    }
    return out;
}

enum class ExistenceCase { CaseI, CaseII, Inconclusive };

inline const char* to_string(ExistenceCase c) {
    switch (c) {
        case ExistenceCase::CaseI: return "i";
        case ExistenceCase::CaseII: return "ii";
        default: return "inconclusive";
    }
}

struct ExistenceCondition {
    ExistenceCase case_ = ExistenceCase::Inconclusive;
    double s_value = 0.0;       // logistic S from the sufficient condition
    double lambda_bound = 0.0;  // condition (ii) requires lambda < lambda_bound
    std::string warning;        // set when rho != rho_pi or sigma != sigma_pi
};

// Sufficient condition for at least one fixed point. Case (i): p_e <= p_c.
// Case (ii): lambda < (p_c/p_e - S)/(1 - S) with
//   S = logistic(sigma Ebar (1-kappa) - sigma_pi pi_bar).
inline ExistenceCondition existence_condition(double lambda, const ModelParams& p) {
    check_lambda(lambda);
    ExistenceCondition out;
    if (p.rho != p.rho_pi || p.sigma != p.sigma_pi)
        out.warning = "condition derived under rho=rho_pi and sigma=sigma_pi";
    const double x = p.sigma * p.domain_bound() * (1.0 - p.kappa) - p.sigma_pi * p.pi_bar;
    out.s_value = (x >= 0.0) ? 1.0 / (1.0 + std::exp(-x))
                             : std::exp(x) / (1.0 + std::exp(x));
    const double price_ratio = p.price_consumption / p.price_education;
    out.lambda_bound = (price_ratio - out.s_value) / (1.0 - out.s_value);
    if (p.price_education <= p.price_consumption) {
        out.case_ = ExistenceCase::CaseI;
    } else if (lambda < out.lambda_bound) {
        out.case_ = ExistenceCase::CaseII;
    } else {
        out.case_ = ExistenceCase::Inconclusive;
    }
    return out;
}

struct CriticalPoint {
    double e = 0.0;
    bool is_max = false;
};

struct CriticalPoints {
    std::vector<CriticalPoint> points;  // interior extrema, ascending in E
    bool unimodal = false;              // exactly one interior max, no interior min
    std::string reason;                 // why certification failed ("monotone", ...)
};

namespace detail {

// Golden-section refinement of an extremum bracketed in [a,b].
template <typename F>
double golden_section(F&& f, double a, double b, bool maximize, double width_tol) {
    const double gr = 0.6180339887498949;
    double c = b - gr * (b - a);
    double d = a + gr * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > width_tol) {
        const bool pick_left = maximize ? (fc > fd) : (fc < fd);
        if (pick_left) {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

} // namespace detail

// Interior extrema of Gamma located from slope sign changes on a dense grid,
// each refined by golden-section search to width 1e-10.
inline CriticalPoints critical_points(double lambda, const ModelParams& p,
                                      std::size_t grid_n = 20000) {
    check_lambda(lambda);
    if (grid_n < 10000) grid_n = 10000;
    const double ebar = p.domain_bound();
    auto g = [&](double e) { return gamma_map(e, lambda, p); };

    std::vector<double> values(grid_n + 1);
    for (std::size_t i = 0; i <= grid_n; ++i)
        values[i] = g(ebar * static_cast<double>(i) / static_cast<double>(grid_n));

    CriticalPoints out;
    std::size_t n_max = 0, n_min = 0;
    for (std::size_t i = 1; i + 1 <= grid_n; ++i) {
        const double slope_l = values[i] - values[i - 1];
        const double slope_r = values[i + 1] - values[i];
        if (slope_l == 0.0 && slope_r == 0.0) continue;  // flat stretch
        const double a = ebar * static_cast<double>(i - 1) / static_cast<double>(grid_n);
        const double b = ebar * static_cast<double>(i + 1) / static_cast<double>(grid_n);
        if (slope_l > 0.0 && slope_r < 0.0) {
            out.points.push_back({detail::golden_section(g, a, b, true, 1e-10), true});
            ++n_max;
        } else if (slope_l < 0.0 && slope_r > 0.0) {
            out.points.push_back({detail::golden_section(g, a, b, false, 1e-10), false});
            ++n_min;
        }
    }
    if (out.points.empty()) {
        out.unimodal = false;
        out.reason = "monotone";
    } else if (n_max == 1 && n_min == 0) {
        out.unimodal = true;
    } else {
        out.unimodal = false;
        out.reason = std::to_string(n_max) + " interior maxima, " + std::to_string(n_min) +
                     " interior minima";
    }
    return out;
}

struct AbsorbingInterval {
    double e_c = 0.0;    // critical point (interior maximum)
    double e_max = 0.0;  // Gamma(E_c)
    double e_min = 0.0;  // Gamma^2(E_c)
    bool unimodal_certified = false;
};

// J = [Gamma^2(E_c), Gamma(E_c)]; requires the unimodality certificate and
// verifies Gamma(J) subset J and Gamma^2(D) subset J on a 10^4-point sample.
inline AbsorbingInterval absorbing_interval(double lambda, const ModelParams& p,
                                            std::size_t grid_n = 20000,
                                            std::size_t verify_n = 10000) {
    const CriticalPoints cps = critical_points(lambda, p, grid_n);
    if (!cps.unimodal)
        throw UnimodalityNotCertified("map is not certified unimodal: " +
                                      (cps.reason.empty() ? std::string("unknown") : cps.reason));
    AbsorbingInterval out;
    out.e_c = cps.points.front().e;
    out.e_max = gamma_map(out.e_c, lambda, p);
    out.e_min = gamma_map(out.e_max, lambda, p);
    const double slack = 1e-10;
    const double ebar = p.domain_bound();
    for (std::size_t i = 0; i <= verify_n; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(verify_n);
        const double ej = out.e_min + t * (out.e_max - out.e_min);
        const double gj = gamma_map(ej, lambda, p);
        if (gj < out.e_min - slack || gj > out.e_max + slack)
            throw UnimodalityNotCertified("forward invariance of J failed at E=" +
                                          std::to_string(ej));
        const double ed = ebar * t;
        const double g2 = gamma_map(gamma_map(ed, lambda, p), lambda, p);
        if (g2 < out.e_min - slack || g2 > out.e_max + slack)
            throw UnimodalityNotCertified("two-step absorption failed at E0=" +
                                          std::to_string(ed));
    }
    out.unimodal_certified = true;
    return out;
}

struct ComparativeStatics {
    double de_dkappa = 0.0;
    double gamma_kappa = 0.0;      // dGamma/dkappa at the fixed point
    double gamma_kappa_alt = 0.0;  // -E* dGamma/dPi_bar, independent route
    bool saturated = false;        // premium clamp binds: derivative is 0
};

// Implicit-function comparative statics dE*/dkappa = Gamma_kappa / (1 - Gamma_E)
// at a locally stable interior fixed point. In the saturated regime the map
// does not depend on kappa locally and the derivative is 0.
inline ComparativeStatics comparative_statics_kappa(double e_star, double lambda,
                                                    const ModelParams& p) {
    check_enrolment_domain(e_star, p);
    check_lambda(lambda);
    ComparativeStatics out;
    const Regime reg = regime_of(e_star, p);
    if (reg == Regime::Kink)
        throw KinkProximity("fixed point within eps_kink of the premium kink");
    if (reg == Regime::Saturated) {
        out.saturated = true;
        return out;
    }
    const MapDerivative d = gamma_derivative_e(e_star, lambda, p);
    if (std::fabs(d.value) >= 1.0 - p.tol.classification_band)
        throw NotStable("|Gamma_E| = " + std::to_string(std::fabs(d.value)) +
                        " at the fixed point; implicit function theorem needs |Gamma_E| < 1");

    // Route 1: central difference in kappa.
    const double hk = p.tol.fd_h_rel * std::max(1.0, p.kappa);
    ModelParams up = p, dn = p;
    up.kappa = p.kappa + hk;
    dn.kappa = p.kappa - hk;
    out.gamma_kappa = (gamma_map(e_star, lambda, up) - gamma_map(e_star, lambda, dn)) / (2.0 * hk);

    // Route 2: dPi/dkappa = -E, probed through a shifted pi_bar.
    const double hp = p.tol.fd_h_rel * std::max(1.0, p.pi_bar);
    ModelParams up2 = p, dn2 = p;
    up2.pi_bar = p.pi_bar + hp;
    dn2.pi_bar = p.pi_bar - hp;
    const double gamma_pi =
        (gamma_map(e_star, lambda, up2) - gamma_map(e_star, lambda, dn2)) / (2.0 * hp);
    out.gamma_kappa_alt = -e_star * gamma_pi;

    // below the central-difference noise floor the premium term has underflowed
    // and the map is numerically kappa-insensitive; the routes then carry no
    // signal to compare and the derivative is an exact numerical zero
    const double noise = 1e-9;
    const bool measurable =
        std::fabs(out.gamma_kappa) > noise || std::fabs(out.gamma_kappa_alt) > noise;
    if (measurable) {
        const double scale = std::max(std::fabs(out.gamma_kappa), std::fabs(out.gamma_kappa_alt));
        if (std::fabs(out.gamma_kappa - out.gamma_kappa_alt) > 1e-4 * scale)
            throw Error("Gamma_kappa routes disagree: " + std::to_string(out.gamma_kappa) +
                        " vs " + std::to_string(out.gamma_kappa_alt));
    }
    out.de_dkappa = out.gamma_kappa / (1.0 - d.value);
    if (out.de_dkappa > noise)
        throw Error("dE*/dkappa = " + std::to_string(out.de_dkappa) +
                    " > 0 contradicts the comparative-statics sign result");
    return out;
}

} // namespace edudyn
