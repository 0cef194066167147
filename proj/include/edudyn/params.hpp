#pragma once

#include <cmath>
#include <limits>
#include <string>

#include "edudyn/errors.hpp"

namespace edudyn {

inline constexpr const char* kVersion = "1.0.0";

// Numerical tolerances used across the model operations. Defaults are the
// module constants; configs may override them.
struct Tolerances {
    double eps_den = 1e-300;  // weight-sum underflow guard (degenerate type)
    double eps_w = 1e-14;     // x*log(y) convention threshold and share-boundary guard
    double eps_kink = 1e-9;   // refusal radius around the premium kink E = Pi_bar/kappa
    double fd_h_rel = 1e-6;   // central-difference step factor: h = fd_h_rel*max(1,|x|)
    double domain_slack = 1e-12;      // admissible overshoot of [0, Ebar]
    double fixed_point_residual = 1e-10;
    double classification_band = 1e-8;   // |gamma'| within this of 1 -> nonhyperbolic
    double root_dedup = 1e-9;
    double schur = 1e-10;
};

// Structural constants of the economy. All quantities are per-period.
struct ModelParams {
    double income = 1.0;              // I > 0
    double price_education = 1.2;     // p_e > 0
    double price_consumption = 0.53;  // p_c > 0
    double rho = 0.98;                // follower imitation reactivity, >= 0
    double rho_pi = 0.0;              // follower premium reactivity, >= 0
    double sigma = 16.5;              // positional distinction reactivity, >= 0
    double sigma_pi = 16.5;           // positional premium reactivity, >= 0
    double kappa = 0.3;               // premium sensitivity to supply, >= 0
    double pi_bar = 100.0;            // maximum wage premium, > 0

    Tolerances tol;

    // Upper end of the enrolment domain [0, Ebar].
    double domain_bound() const { return income / price_education; }

    // Position of the premium kink, +inf when kappa = 0.
    double kink_position() const {
        if (kappa <= 0.0) return std::numeric_limits<double>::infinity();
        return pi_bar / kappa;
    }
};

// Population structure. mu only matters for the two-dimensional system.
struct PopulationMix {
    double lambda = 0.5;  // follower share in [0,1]
    double mu = 0.0;      // willingness-to-switch intensity, >= 0
};

inline void validate(const ModelParams& p) {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v))
            throw ConfigError(std::string(name) + " must be finite and > 0, got " + std::to_string(v));
    };
    auto non_negative = [](double v, const char* name) {
        if (!(v >= 0.0) || !std::isfinite(v))
            throw ConfigError(std::string(name) + " must be finite and >= 0, got " + std::to_string(v));
    };
    positive(p.income, "income");
    positive(p.price_education, "price_education");
    positive(p.price_consumption, "price_consumption");
    non_negative(p.rho, "rho");
    non_negative(p.rho_pi, "rho_pi");
    non_negative(p.sigma, "sigma");
    non_negative(p.sigma_pi, "sigma_pi");
    non_negative(p.kappa, "kappa");
    positive(p.pi_bar, "pi_bar");
    if (!std::isfinite(p.domain_bound()))
        throw ConfigError("domain bound income/price_education is not finite");
}

inline void validate(const PopulationMix& m) {
    if (!(m.lambda >= 0.0 && m.lambda <= 1.0))
        throw ConfigError("lambda must lie in [0,1], got " + std::to_string(m.lambda));
    if (!(m.mu >= 0.0) || !std::isfinite(m.mu))
        throw ConfigError("mu must be finite and >= 0, got " + std::to_string(m.mu));
}

} // namespace edudyn
