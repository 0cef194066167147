#pragma once

// State-to-weights pipeline: wage premium, consumption identity, endogenous
// Cobb-Douglas weights, education expenditure shares, indirect utilities, and
// their analytic derivatives in E.
//
// Conventions used throughout:
//   Ebar = I/p_e          enrolment domain is [0, Ebar]
//   premium(E) = max(pi_bar - kappa*E, 0); "interior" means the clamp is
//   inactive, "saturated" means it binds. Derivatives refuse points within
//   eps_kink of the kink E = pi_bar/kappa.

#include <cmath>
#include <string>

#include "edudyn/errors.hpp"
#include "edudyn/params.hpp"

namespace edudyn {

enum class Regime { Interior, Saturated, Kink };

struct Premium {
    double value = 0.0;
    bool saturated = false;
};

// The four endogenous weights at a given enrolment level.
struct PreferenceWeights {
    double alpha_f = 0.0;
    double beta_f = 0.0;
    double alpha_p = 0.0;
    double beta_p = 0.0;
};

struct TypeShares {
    double s_f = 0.0;
    double s_p = 0.0;
};

struct IndirectUtility {
    double u_f = 0.0;
    double u_p = 0.0;
};

inline void check_enrolment_domain(double e, const ModelParams& p) {
    const double ebar = p.domain_bound();
    const double slack = p.tol.domain_slack * std::max(1.0, ebar);
    if (!(e >= -slack && e <= ebar + slack) || !std::isfinite(e))
        throw DomainError("enrolment E=" + std::to_string(e) + " outside [0, " +
                          std::to_string(ebar) + "]");
}

inline double clamp_enrolment(double e, const ModelParams& p) {
    return std::min(std::max(e, 0.0), p.domain_bound());
}

inline Regime regime_of(double e, const ModelParams& p) {
    const double kink = p.kink_position();
    if (!std::isfinite(kink)) return Regime::Interior;
    if (e < kink - p.tol.eps_kink) return Regime::Interior;
    if (e > kink + p.tol.eps_kink) return Regime::Saturated;
    return Regime::Kink;
}

inline const char* to_string(Regime r) {
    switch (r) {
        case Regime::Interior: return "interior";
        case Regime::Saturated: return "saturated";
        default: return "kink";
    }
}

// Pi(E) = max(pi_bar - kappa*E, 0), with a flag for the binding clamp.
inline Premium wage_premium(double e, const ModelParams& p) {
    check_enrolment_domain(e, p);
    e = clamp_enrolment(e, p);
    const double raw = p.pi_bar - p.kappa * e;
    if (raw < 0.0) return {0.0, true};
    return {raw, false};
}

// C(E) = I/p_c - (p_e/p_c) E, the aggregate budget identity. The result is
// clamped to [0, I/p_c]: at E = Ebar the identity is exactly zero but the
// floating-point expression can undershoot by one ulp.
inline double consumption_of(double e, const ModelParams& p) {
    check_enrolment_domain(e, p);
    e = clamp_enrolment(e, p);
    const double c = p.income / p.price_consumption -
                     (p.price_education / p.price_consumption) * e;
    return std::min(std::max(c, 0.0), p.income / p.price_consumption);
}

// alpha_F = 1 - exp(-rho E - rho_pi Pi)     beta_F = 1 - exp(-rho C)
// alpha_P = exp(-sigma E)(1 - exp(-sigma_pi Pi))   beta_P = exp(-sigma C)
inline PreferenceWeights preference_weights(double e, const ModelParams& p) {
    check_enrolment_domain(e, p);
    e = clamp_enrolment(e, p);
    const double pi = wage_premium(e, p).value;
    const double c = consumption_of(e, p);
    PreferenceWeights w;
    w.alpha_f = 1.0 - std::exp(-p.rho * e - p.rho_pi * pi);
    w.beta_f = 1.0 - std::exp(-p.rho * c);
    w.alpha_p = std::exp(-p.sigma * e) * (1.0 - std::exp(-p.sigma_pi * pi));
    w.beta_p = std::exp(-p.sigma * c);
    return w;
}

// s_i = alpha_i / (alpha_i + beta_i).
inline TypeShares type_shares(const PreferenceWeights& w, const Tolerances& tol = {}) {
    const double den_f = w.alpha_f + w.beta_f;
    const double den_p = w.alpha_p + w.beta_p;
    if (!(den_f > tol.eps_den))
        throw DegenerateWeights("follower weights vanished: alpha_F + beta_F = " +
                                std::to_string(den_f));
    if (!(den_p > tol.eps_den))
        throw DegenerateWeights("positional weights vanished: alpha_P + beta_P = " +
                                std::to_string(den_p));
    return {w.alpha_f / den_f, w.alpha_p / den_p};
}

inline TypeShares type_shares(double e, const ModelParams& p) {
    return type_shares(preference_weights(e, p), p.tol);
}

// d/dE of the four weights. In the saturated regime the premium terms use
// Pi_E = 0; within eps_kink of the kink the derivative is refused.
inline PreferenceWeights weights_derivative_e(double e, const ModelParams& p) {
    check_enrolment_domain(e, p);
    e = clamp_enrolment(e, p);
    const Regime reg = regime_of(e, p);
    if (reg == Regime::Kink)
        throw KinkProximity("derivative requested within eps_kink of E = pi_bar/kappa = " +
                            std::to_string(p.kink_position()));
    const double pi_e = (reg == Regime::Interior) ? -p.kappa : 0.0;
    const double pi = wage_premium(e, p).value;
    const double c = consumption_of(e, p);
    const double c_e = -p.price_education / p.price_consumption;

    const double ea = std::exp(-p.rho * e - p.rho_pi * pi);   // e^A
    const double eb = std::exp(-p.rho * c);                   // e^B
    const double eat = std::exp(-p.sigma * e);                // e^A~
    const double ebt = std::exp(-p.sigma_pi * pi);            // e^B~
    const double ect = std::exp(-p.sigma * c);                // e^C~

    PreferenceWeights d;
    // A_E = -rho - rho_pi*Pi_E;  alpha_F = 1 - e^A
    d.alpha_f = -ea * (-p.rho - p.rho_pi * pi_e);
    // B_E = -rho*C_E;  beta_F = 1 - e^B  (decreasing in E since C falls)
    d.beta_f = -eb * (-p.rho * c_e);
    // alpha_P = e^A~ (1 - e^B~);  B~_E = -sigma_pi*Pi_E
    d.alpha_p = -p.sigma * eat * (1.0 - ebt) - eat * ebt * (-p.sigma_pi * pi_e);
    // beta_P = e^C~;  C~_E = -sigma*C_E
    d.beta_p = ect * (-p.sigma * c_e);
    return d;
}

struct SharesDerivative {
    double ds_f = 0.0;
    double ds_p = 0.0;
};

// Quotient rule: s_{i,E} = (alpha' beta - alpha beta') / (alpha+beta)^2.
inline SharesDerivative shares_derivative_e(double e, const ModelParams& p) {
    const PreferenceWeights w = preference_weights(e, p);
    const PreferenceWeights d = weights_derivative_e(e, p);
    const double den_f = w.alpha_f + w.beta_f;
    const double den_p = w.alpha_p + w.beta_p;
    if (!(den_f > p.tol.eps_den) || !(den_p > p.tol.eps_den))
        throw DegenerateWeights("weight sum underflow in shares_derivative_e");
    SharesDerivative out;
    out.ds_f = (d.alpha_f * w.beta_f - w.alpha_f * d.beta_f) / (den_f * den_f);
    out.ds_p = (d.alpha_p * w.beta_p - w.alpha_p * d.beta_p) / (den_p * den_p);
    return out;
}

// U_i = alpha_i [log(I/p_e) + log s_i] + beta_i [log(I/p_c) + log(1-s_i)],
// with the limit convention x*(log budget + log share) = 0 once x <= eps_w:
// as alpha -> 0 with beta fixed, s ~ alpha/beta, so alpha*log(s) -> 0.
inline IndirectUtility indirect_utility(double e, const ModelParams& p) {
    const PreferenceWeights w = preference_weights(e, p);
    const TypeShares s = type_shares(w, p.tol);
    const double log_e_budget = std::log(p.income / p.price_education);
    const double log_c_budget = std::log(p.income / p.price_consumption);
    const double eps = p.tol.eps_w;
    auto term = [eps](double x, double log_budget, double share) {
        if (x <= eps) return 0.0;
        return x * (log_budget + std::log(share));
    };
    IndirectUtility u;
    u.u_f = term(w.alpha_f, log_e_budget, s.s_f) + term(w.beta_f, log_c_budget, 1.0 - s.s_f);
    u.u_p = term(w.alpha_p, log_e_budget, s.s_p) + term(w.beta_p, log_c_budget, 1.0 - s.s_p);
    return u;
}

struct UtilityDerivative {
    double du_f = 0.0;
    double du_p = 0.0;
};

namespace detail {

// Compact form: the s_{i,E} terms cancel, leaving
//   U_{i,E} = alpha' [log(I/p_e) + log s] + beta' [log(I/p_c) + log(1-s)].
inline double utility_derivative_compact(double a, double b, double da, double db,
                                         double log_e_budget, double log_c_budget) {
    const double s = a / (a + b);
    return da * (log_e_budget + std::log(s)) + db * (log_c_budget + std::log(1.0 - s));
}

// Equivalent expansion through log alpha, log beta, log(alpha+beta):
//   U_i = alpha log alpha + beta log beta - (alpha+beta) log(alpha+beta)
//         + alpha log(I/p_e) + beta log(I/p_c).
inline double utility_derivative_expanded(double a, double b, double da, double db,
                                          double log_e_budget, double log_c_budget) {
    const double lab = std::log(a + b);
    return da * (1.0 + std::log(a)) + db * (1.0 + std::log(b)) - (da + db) * (1.0 + lab) +
           da * log_e_budget + db * log_c_budget;
}

} // namespace detail

// Both the compact and the expanded form are computed; they must agree to
// rel. 1e-10 wherever both are defined.
inline UtilityDerivative utility_derivative_e(double e, const ModelParams& p) {
    const PreferenceWeights w = preference_weights(e, p);
    const PreferenceWeights d = weights_derivative_e(e, p);
    const TypeShares s = type_shares(w, p.tol);
    const double eps = p.tol.eps_w;
    if (s.s_f <= eps || s.s_f >= 1.0 - eps)
        throw ShareAtBoundary("s_F = " + std::to_string(s.s_f) + " at a share boundary");
    if (s.s_p <= eps || s.s_p >= 1.0 - eps)
        throw ShareAtBoundary("s_P = " + std::to_string(s.s_p) + " at a share boundary");
    const double log_e_budget = std::log(p.income / p.price_education);
    const double log_c_budget = std::log(p.income / p.price_consumption);

    UtilityDerivative out;
    auto both = [&](double a, double b, double da, double db) {
        const double compact =
            detail::utility_derivative_compact(a, b, da, db, log_e_budget, log_c_budget);
        const double expanded =
            detail::utility_derivative_expanded(a, b, da, db, log_e_budget, log_c_budget);
        const double scale = std::max({1e-12, std::fabs(compact), std::fabs(expanded)});
        if (std::fabs(compact - expanded) > 1e-10 * scale)
            throw Error("utility derivative forms disagree: compact=" + std::to_string(compact) +
                        " expanded=" + std::to_string(expanded));
        return compact;
    };
    out.du_f = both(w.alpha_f, w.beta_f, d.alpha_f, d.beta_f);
    out.du_p = both(w.alpha_p, w.beta_p, d.alpha_p, d.beta_p);
    return out;
}

} // namespace edudyn
