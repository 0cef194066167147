#pragma once

// Shared fixtures for the test suites: the figure parameter sets, the pinned
// unimodal set, and seeded random samplers.

#include <random>

#include "edudyn/edudyn.hpp"

#ifndef EDUDYN_SOURCE_DIR
#define EDUDYN_SOURCE_DIR "."
#endif

namespace testing_support {

using edudyn::ModelParams;

// Figure caption family: I=1, p_e=1.2, p_c=0.53, rho=0.98, kappa=0.3,
// pi_bar=100, rho_pi=0, sigma_pi=sigma.
inline ModelParams fig_params(double sigma) {
    ModelParams p;
    p.income = 1.0;
    p.price_education = 1.2;
    p.price_consumption = 0.53;
    p.rho = 0.98;
    p.rho_pi = 0.0;
    p.sigma = sigma;
    p.sigma_pi = sigma;
    p.kappa = 0.3;
    p.pi_bar = 100.0;
    return p;
}

// Premium-sensitive pre-chaos set: pi_bar=1 keeps exp(-sigma_pi*Pi) well away
// from underflow so kappa actually moves the map at double precision.
inline ModelParams prechaos_params() {
    ModelParams p = fig_params(3.0);
    p.pi_bar = 1.0;
    return p;
}

// Certified-unimodal set: the premium crash near the right edge (kappa*Ebar
// close to pi_bar, large sigma_pi) lets the positional collapse dominate the
// follower upturn, leaving one interior maximum and no interior minimum.
inline ModelParams unimodal_params() {
    ModelParams p;
    p.income = 1.0;
    p.price_education = 1.2;
    p.price_consumption = 0.53;
    p.rho = 0.3;
    p.rho_pi = 0.0;
    p.sigma = 2.0;
    p.sigma_pi = 40.0;
    p.kappa = 1.1;
    p.pi_bar = 1.0;
    return p;
}
inline constexpr double kUnimodalLambda = 0.2;

struct ParamSampler {
    std::mt19937_64 rng;

    explicit ParamSampler(std::uint64_t seed) : rng(seed) {}

    double uniform(double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(rng);
    }

    ModelParams sample() {
        ModelParams p;
        p.income = 1.0;
        p.price_education = uniform(0.8, 1.5);
        p.price_consumption = uniform(0.4, 1.2);
        p.rho = uniform(0.2, 3.0);
        p.rho_pi = (uniform(0.0, 1.0) < 0.5) ? 0.0 : uniform(0.0, 1.0);
        p.sigma = uniform(0.3, 6.0);
        p.sigma_pi = (uniform(0.0, 1.0) < 0.5) ? p.sigma : uniform(0.3, 6.0);
        p.kappa = uniform(0.0, 0.9);
        p.pi_bar = uniform(0.5, 50.0);
        return p;
    }

    // Interior smooth state: inside the domain, away from the kink, with both
    // shares off their boundaries (so every derivative is defined).
    double sample_interior_state(const ModelParams& p) {
        const double ebar = p.domain_bound();
        for (int attempt = 0; attempt < 256; ++attempt) {
            const double e = uniform(0.02 * ebar, 0.98 * ebar);
            if (std::fabs(e - p.kink_position()) < 1e-3) continue;
            if (edudyn::regime_of(e, p) != edudyn::Regime::Interior) continue;
            try {
                const auto s = edudyn::type_shares(e, p);
                if (s.s_f < 1e-6 || s.s_f > 1.0 - 1e-6) continue;
                if (s.s_p < 1e-6 || s.s_p > 1.0 - 1e-6) continue;
            } catch (const edudyn::Error&) {
                continue;
            }
            return e;
        }
        return 0.5 * p.domain_bound();
    }
};

} // namespace testing_support
