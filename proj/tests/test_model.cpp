#include <catch2/catch_amalgamated.hpp>

#include "support.hpp"

using namespace edudyn;
using testing_support::fig_params;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// Expected values below were frozen from a 40-digit extended-precision
// evaluation of the closed forms.
constexpr double kAlphaF05 = 0.38737360581558393;
constexpr double kBetaF05 = 0.52270600751732823;
constexpr double kAlphaP05 = 2.6125855730166753e-4;
constexpr double kBetaP05 = 3.9066505470286122e-6;
constexpr double kUF04 = -0.27344442166607284;
constexpr double kUP04 = -2.4895196639328469e-4;

} // namespace

TEST_CASE("wage premium clamp and saturation flag") {
    ModelParams p = fig_params(16.5);
    const Premium direct = wage_premium(0.5, p);
    CHECK_THAT(direct.value, WithinRel(99.85, 1e-14));
    CHECK_FALSE(direct.saturated);

    ModelParams clamped = p;
    clamped.pi_bar = 1.0;
    clamped.kappa = 2.0;
    const Premium sat = wage_premium(0.8, clamped);
    CHECK(sat.value == 0.0);
    CHECK(sat.saturated);

    ModelParams flat = p;
    flat.kappa = 0.0;
    for (double e : {0.0, 0.3, 0.8333}) {
        CHECK(wage_premium(e, flat).value == 100.0);
        CHECK_FALSE(wage_premium(e, flat).saturated);
    }

    CHECK_THROWS_AS(wage_premium(-1e-6, p), DomainError);
    CHECK_THROWS_AS(wage_premium(p.domain_bound() + 1e-6, p), DomainError);
    CHECK_NOTHROW(wage_premium(p.domain_bound() + 1e-13, p));
}

TEST_CASE("consumption identity endpoints") {
    ModelParams p = fig_params(16.5);
    CHECK_THAT(consumption_of(0.0, p), WithinRel(1.0 / 0.53, 1e-15));
    CHECK_THAT(consumption_of(p.domain_bound(), p), WithinAbs(0.0, 1e-15));
    CHECK_THAT(consumption_of(0.5, p), WithinRel((1.0 - 0.6) / 0.53, 1e-14));
}

TEST_CASE("preference weights closed form") {
    SECTION("rho = rho_pi = 0 kills the follower education weight") {
        ModelParams p = fig_params(16.5);
        p.rho = 0.0;
        p.rho_pi = 0.0;
        CHECK(preference_weights(0.3, p).alpha_f == 0.0);
    }
    SECTION("saturated premium kills the positional education weight") {
        ModelParams p = fig_params(16.5);
        p.pi_bar = 1.0;
        p.kappa = 2.0;  // kink at 0.5
        CHECK(preference_weights(0.7, p).alpha_p == 0.0);
    }
    SECTION("frozen extended-precision values at the figure set, E = 0.5") {
        const PreferenceWeights w = preference_weights(0.5, fig_params(16.5));
        CHECK_THAT(w.alpha_f, WithinRel(kAlphaF05, 1e-13));
        CHECK_THAT(w.beta_f, WithinRel(kBetaF05, 1e-13));
        CHECK_THAT(w.alpha_p, WithinRel(kAlphaP05, 1e-13));
        CHECK_THAT(w.beta_p, WithinRel(kBetaP05, 1e-13));
    }
    SECTION("bounds and premium identity on a 1e4-point domain grid") {
        const ModelParams p = fig_params(16.5);
        const double ebar = p.domain_bound();
        for (int i = 0; i <= 10000; ++i) {
            const double e = ebar * i / 10000.0;
            const PreferenceWeights w = preference_weights(e, p);
            REQUIRE(w.alpha_f >= 0.0);
            REQUIRE(w.alpha_f < 1.0);
            REQUIRE(w.beta_f >= 0.0);
            REQUIRE(w.beta_f < 1.0);
            REQUIRE(w.alpha_p >= 0.0);
            REQUIRE(w.alpha_p <= 1.0);
            REQUIRE(w.beta_p > 0.0);
            REQUIRE(w.beta_p <= 1.0);
            const Premium pi = wage_premium(e, p);
            REQUIRE(pi.value >= 0.0);
            if (p.pi_bar - p.kappa * e >= 0.0)
                REQUIRE(pi.value == p.pi_bar - p.kappa * e);
        }
    }
}

TEST_CASE("type shares") {
    const Tolerances tol;
    CHECK(type_shares(PreferenceWeights{0.0, 0.4, 0.2, 0.2}, tol).s_f == 0.0);
    CHECK(type_shares(PreferenceWeights{0.3, 0.3, 0.25, 0.25}, tol).s_f == 0.5);
    CHECK(type_shares(PreferenceWeights{0.3, 0.3, 0.25, 0.25}, tol).s_p == 0.5);

    SECTION("saturated premium forces s_P = 0") {
        ModelParams p = fig_params(2.0);
        p.pi_bar = 1.0;
        p.kappa = 2.0;
        CHECK(type_shares(0.7, p).s_p == 0.0);
    }
    SECTION("degenerate follower weights raise") {
        ModelParams p = fig_params(16.5);
        p.rho = 0.0;
        p.rho_pi = 0.0;  // alpha_F = beta_F = 0 identically
        CHECK_THROWS_AS(type_shares(0.3, p), DegenerateWeights);
    }
}

TEST_CASE("share derivatives match central finite differences") {
    SECTION("kappa = 0, rho_pi = 0") {
        ModelParams p = fig_params(16.5);
        p.kappa = 0.0;
        const double e = 0.4;
        const SharesDerivative d = shares_derivative_e(e, p);
        const auto fd_f = finite_difference([&](double x) { return type_shares(x, p).s_f; }, e);
        const auto fd_p = finite_difference([&](double x) { return type_shares(x, p).s_p; }, e);
        CHECK_THAT(d.ds_f, WithinRel(fd_f.value, 1e-6));
        CHECK_THAT(d.ds_p, WithinRel(fd_p.value, 1e-6));
    }
    SECTION("sigma = 0, large sigma_pi: positional share falls in E") {
        ModelParams p = fig_params(16.5);
        p.sigma = 0.0;
        p.sigma_pi = 8.0;
        p.pi_bar = 1.0;  // keep the premium term away from underflow
        const double e = 0.3;
        const SharesDerivative d = shares_derivative_e(e, p);
        const auto fd_p = finite_difference([&](double x) { return type_shares(x, p).s_p; }, e);
        CHECK(d.ds_p < 0.0);
        CHECK(std::fabs(d.ds_p - fd_p.value) <= 1e-6 * std::fabs(fd_p.value) + 1e-9);
    }
    SECTION("sigma = sigma_pi = 0: positional side identically zero") {
        ModelParams p = fig_params(16.5);
        p.sigma = 0.0;
        p.sigma_pi = 0.0;
        CHECK(preference_weights(0.4, p).alpha_p == 0.0);
        CHECK(type_shares(0.4, p).s_p == 0.0);
        CHECK(shares_derivative_e(0.4, p).ds_p == 0.0);
    }
    SECTION("kink refusal and saturated-regime values") {
        ModelParams p = fig_params(2.0);
        p.pi_bar = 1.0;
        p.kappa = 2.0;  // kink at E = 0.5
        CHECK_THROWS_AS(shares_derivative_e(0.5, p), KinkProximity);
        CHECK_THROWS_AS(weights_derivative_e(0.5 + 1e-10, p), KinkProximity);
        // strictly inside the saturated regime the FD oracle still applies
        const double e = 0.7;
        const SharesDerivative d = shares_derivative_e(e, p);
        const auto fd_f = finite_difference([&](double x) { return type_shares(x, p).s_f; }, e);
        CHECK_THAT(d.ds_f, WithinRel(fd_f.value, 1e-6));
        CHECK(d.ds_p == 0.0);
    }
    SECTION("FD agreement on a dense grid away from the kink") {
        ModelParams kinked = fig_params(2.0);
        kinked.pi_bar = 1.0;
        kinked.kappa = 2.0;  // kink at 0.5, inside the domain
        for (const ModelParams& p : {fig_params(16.5), kinked}) {
            const double ebar = p.domain_bound();
            for (int i = 1; i < 200; ++i) {
                const double e = ebar * i / 200.0;
                if (std::fabs(e - p.kink_position()) < 1e-6) continue;
                const SharesDerivative d = shares_derivative_e(e, p);
                const auto fd_f =
                    finite_difference([&](double x) { return type_shares(x, p).s_f; }, e);
                const auto fd_p =
                    finite_difference([&](double x) { return type_shares(x, p).s_p; }, e);
                REQUIRE(std::fabs(d.ds_f - fd_f.value) <= 1e-6 * std::fabs(fd_f.value) + 1e-9);
                REQUIRE(std::fabs(d.ds_p - fd_p.value) <= 1e-6 * std::fabs(fd_p.value) + 1e-9);
            }
        }
    }
}

TEST_CASE("indirect utility") {
    SECTION("vanishing alpha term follows the limit convention") {
        ModelParams p = fig_params(16.5);  // rho_pi = 0, so alpha_F(0) = 0
        const PreferenceWeights w = preference_weights(0.0, p);
        REQUIRE(w.alpha_f == 0.0);
        const IndirectUtility u = indirect_utility(0.0, p);
        CHECK_THAT(u.u_f, WithinRel(w.beta_f * std::log(p.income / p.price_consumption), 1e-14));
    }
    SECTION("frozen values at the figure set, E = 0.4") {
        const IndirectUtility u = indirect_utility(0.4, fig_params(16.5));
        CHECK_THAT(u.u_f, WithinRel(kUF04, 1e-13));
        CHECK_THAT(u.u_p, WithinRel(kUP04, 1e-13));
    }
    SECTION("grid-search maximization oracle over the budget line") {
        const ModelParams p = fig_params(16.5);
        const PreferenceWeights w = preference_weights(0.4, p);
        const IndirectUtility u = indirect_utility(0.4, p);
        const double ebar = p.domain_bound();
        auto grid_max = [&](double a, double b) {
            double best = -std::numeric_limits<double>::infinity();
            const int n = 1000000;
            for (int k = 1; k < n; ++k) {
                const double e = ebar * k / n;
                const double c = (p.income - p.price_education * e) / p.price_consumption;
                if (c <= 0.0) break;
                best = std::max(best, a * std::log(e) + b * std::log(c));
            }
            return best;
        };
        const double gf = grid_max(w.alpha_f, w.beta_f);
        const double gp = grid_max(w.alpha_p, w.beta_p);
        CHECK_THAT(u.u_f, WithinAbs(gf, 1e-8));
        CHECK_THAT(u.u_p, WithinAbs(gp, 1e-8));
        CHECK(u.u_f >= gf - 1e-12);  // the closed form is the true maximum
        CHECK(u.u_p >= gp - 1e-12);
    }
    SECTION("degenerate weights propagate") {
        ModelParams p = fig_params(16.5);
        p.rho = 0.0;
        p.rho_pi = 0.0;
        CHECK_THROWS_AS(indirect_utility(0.3, p), DegenerateWeights);
    }
}

TEST_CASE("utility derivative: compact and expanded forms, FD oracle") {
    SECTION("figure set at E = 0.4 matches finite differences") {
        const ModelParams p = fig_params(16.5);
        const UtilityDerivative d = utility_derivative_e(0.4, p);
        const auto fd_f =
            finite_difference([&](double x) { return indirect_utility(x, p).u_f; }, 0.4);
        const auto fd_p =
            finite_difference([&](double x) { return indirect_utility(x, p).u_p; }, 0.4);
        CHECK_THAT(d.du_f, WithinRel(fd_f.value, 1e-6));
        CHECK_THAT(d.du_p, WithinRel(fd_p.value, 1e-6));
    }
    SECTION("zero weight derivatives give a zero utility derivative") {
        CHECK(detail::utility_derivative_compact(0.3, 0.4, 0.0, 0.0, -0.18, 0.63) == 0.0);
        CHECK(detail::utility_derivative_expanded(0.3, 0.4, 0.0, 0.0, -0.18, 0.63) == 0.0);
    }
    SECTION("compact and expanded forms agree on 1000 random interior states") {
        testing_support::ParamSampler sampler(20250809);
        int tested = 0;
        while (tested < 1000) {
            const ModelParams p = sampler.sample();
            const double e = sampler.sample_interior_state(p);
            try {
                // the operation itself cross-checks both forms to rel 1e-10
                const UtilityDerivative d = utility_derivative_e(e, p);
                const auto fd_f =
                    finite_difference([&](double x) { return indirect_utility(x, p).u_f; }, e);
                const auto fd_p =
                    finite_difference([&](double x) { return indirect_utility(x, p).u_p; }, e);
                REQUIRE(std::fabs(d.du_f - fd_f.value) <= 1e-6 * std::fabs(fd_f.value) + 1e-9);
                REQUIRE(std::fabs(d.du_p - fd_p.value) <= 1e-6 * std::fabs(fd_p.value) + 1e-9);
                ++tested;
            } catch (const Error&) {
                continue;  // boundary share or kink: not an interior smooth state
            }
        }
    }
    SECTION("share at boundary raises") {
        ModelParams p = fig_params(16.5);
        p.sigma = 0.0;
        p.sigma_pi = 0.0;  // s_P identically 0
        CHECK_THROWS_AS(utility_derivative_e(0.4, p), ShareAtBoundary);
    }
}
