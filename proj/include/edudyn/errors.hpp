#pragma once

#include <stdexcept>
#include <string>

namespace edudyn {

// Base class for all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Input outside the state domain [0, I/p_e] x [0,1] (beyond tolerance).
struct DomainError : Error {
    using Error::Error;
};

// Both weights of one behavioural type vanished (alpha_i + beta_i underflow),
// e.g. rho = rho_pi = 0 makes the follower weights identically zero.
struct DegenerateWeights : Error {
    using Error::Error;
};

// Derivative requested within eps_kink of the premium kink E = Pi_bar/kappa,
// where the map is continuous but not differentiable.
struct KinkProximity : Error {
    using Error::Error;
};

// A share hit {0,1} to within eps_w; log-derivative expressions diverge.
struct ShareAtBoundary : Error {
    using Error::Error;
};

// Comparative statics requested at a fixed point that is not locally stable.
struct NotStable : Error {
    using Error::Error;
};

// The map failed the one-max-no-min certificate required by the
// absorbing-interval construction.
struct UnimodalityNotCertified : Error {
    using Error::Error;
};

// A stability report was requested at a state that does not satisfy the
// fixed-point residual bound.
struct NotAFixedPoint : Error {
    using Error::Error;
};

// The mu threshold requires |Gamma_E| < 1 at the fixed point.
struct GStarNotBelowOne : Error {
    using Error::Error;
};

// Configuration parse or validation failure; message carries the location
// (line or JSON path) and the offending key or bound.
struct ConfigError : Error {
    using Error::Error;
};

} // namespace edudyn
