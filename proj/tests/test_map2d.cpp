#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "support.hpp"

using namespace edudyn;
using testing_support::fig_params;
using testing_support::prechaos_params;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("switch_share") {
    const ModelParams p = prechaos_params();

    SECTION("mu = 0 gives one half regardless of utilities") {
        for (double e : {0.0, 0.2, 0.5, 0.8}) CHECK(switch_share(e, p, 0.0) == 0.5);
    }
    SECTION("large mu pushes to the better type, without overflow") {
        // at E = 0 followers win (dU > 0), near the right edge they lose
        const IndirectUtility u0 = indirect_utility(0.0, p);
        REQUIRE(u0.u_f > u0.u_p);
        CHECK_THAT(switch_share(0.0, p, 1e6), WithinAbs(1.0, 1e-12));
        const double ebar = p.domain_bound();
        const IndirectUtility u1 = indirect_utility(ebar, p);
        REQUIRE(u1.u_f < u1.u_p);
        CHECK_THAT(switch_share(ebar, p, 1e6), WithinAbs(0.0, 1e-12));
        CHECK(std::isfinite(switch_share(0.0, p, 1e308)));
    }
    SECTION("utility tie gives one half for any mu") {
        // bisect the utility gap to its zero crossing (independent oracle)
        double lo = 0.2, hi = 0.4;
        auto gap = [&](double e) {
            const IndirectUtility u = indirect_utility(e, p);
            return u.u_f - u.u_p;
        };
        REQUIRE(gap(lo) * gap(hi) < 0.0);
        for (int i = 0; i < 200; ++i) {
            const double m = 0.5 * (lo + hi);
            if (gap(lo) * gap(m) <= 0.0)
                hi = m;
            else
                lo = m;
        }
        const double e_tie = 0.5 * (lo + hi);
        for (double mu : {0.5, 5.0, 50.0})
            CHECK_THAT(switch_share(e_tie, p, mu), WithinAbs(0.5, 1e-9));
    }
    SECTION("monotone in mu on the winning side") {
        double prev = switch_share(0.0, p, 0.0);
        for (double mu : {0.5, 1.0, 2.0, 4.0}) {
            const double v = switch_share(0.0, p, mu);
            REQUIRE(v >= prev);
            prev = v;
        }
    }
}

TEST_CASE("phi and iterate_2d") {
    const ModelParams p = prechaos_params();

    SECTION("second coordinate is independent of lambda, exactly") {
        for (double e : {0.1, 0.4, 0.7}) {
            const State2D a = phi_map({e, 0.1}, p, 1.3);
            const State2D b = phi_map({e, 0.9}, p, 1.3);
            CHECK(a.lambda == b.lambda);
        }
    }
    SECTION("fixed points stay fixed") {
        const auto fps = fixed_points_2d(p, 0.7);
        REQUIRE_FALSE(fps.empty());
        const Trajectory2D traj = iterate_2d(fps[0].state, p, 0.7, 50, 0);
        for (const State2D& s : traj.states) {
            REQUIRE_THAT(s.e, WithinAbs(fps[0].state.e, 1e-10));
            REQUIRE_THAT(s.lambda, WithinAbs(fps[0].state.lambda, 1e-10));
        }
    }
    SECTION("mu = 0 pins lambda at one half and E follows the 1-D map") {
        const Trajectory2D traj = iterate_2d({0.3, 0.8}, p, 0.0, 100, 0);
        for (std::size_t t = 1; t < traj.states.size(); ++t)
            REQUIRE(traj.states[t].lambda == 0.5);
        // from E_1 on, the E-coordinate is the lambda = 1/2 one-dimensional orbit
        const Trajectory one_d = iterate_1d(traj.states[1].e, 0.5, p, 99, 0);
        for (std::size_t t = 0; t < one_d.states.size(); ++t)
            REQUIRE(one_d.states[t] == traj.states[t + 1].e);
    }
    SECTION("forward invariance of the state domain on random orbits") {
        std::mt19937_64 rng(99);
        std::uniform_real_distribution<double> ue(0.0, p.domain_bound());
        std::uniform_real_distribution<double> ul(0.0, 1.0);
        const ModelParams chaotic = fig_params(18.0);
        for (int i = 0; i < 100; ++i) {
            State2D s{ue(rng), ul(rng)};
            for (int t = 0; t < 100; ++t) {
                s = phi_map(s, chaotic, 6.0);
                REQUIRE(s.e >= 0.0);
                REQUIRE(s.e <= chaotic.domain_bound());
                REQUIRE(s.lambda >= 0.0);
                REQUIRE(s.lambda <= 1.0);
            }
        }
    }
    SECTION("chaotic regime: lambda visits extreme and intermediate bands") {
        const ModelParams chaotic = fig_params(18.0);
        const Trajectory2D traj = iterate_2d({0.3, 0.5}, chaotic, 6.0, 600, 2000);
        int extremes = 0, middle = 0;
        for (std::size_t t = traj.burn_in; t < traj.states.size(); ++t) {
            const double l = traj.states[t].lambda;
            if (l <= 0.1 || l >= 0.9) ++extremes;
            if (l >= 0.4 && l <= 0.6) ++middle;
        }
        CHECK(extremes > 0);
        CHECK(middle > 0);
    }
}

TEST_CASE("jacobian_2d") {
    SECTION("mu = 0 zeroes the switching row") {
        const ModelParams p = prechaos_params();
        const Jacobian2D j = jacobian_2d({0.4, 0.5}, p, 0.0);
        CHECK(j.v_e == 0.0);
        CHECK(j.v_lambda == 0.0);
        CHECK(j.det == 0.0);
        CHECK(j.trace == j.gamma_e);
        CHECK_THAT(j.spectral_radius(), WithinRel(std::fabs(j.gamma_e), 1e-14));
    }
    SECTION("all four partials match the finite-difference Jacobian") {
        testing_support::ParamSampler sampler(424242);
        int tested = 0;
        while (tested < 300) {
            const ModelParams p = sampler.sample();
            const double mu = sampler.uniform(0.0, 3.0);
            const double e = sampler.sample_interior_state(p);
            const double lam = sampler.uniform(0.05, 0.95);
            try {
                const Jacobian2D a = jacobian_2d({e, lam}, p, mu);
                const Jacobian2D n = fd_jacobian_2d({e, lam}, p, mu);
                REQUIRE(std::fabs(a.gamma_e - n.gamma_e) <=
                        1e-6 * std::fabs(n.gamma_e) + 1e-9);
                REQUIRE(std::fabs(a.gamma_lambda - n.gamma_lambda) <=
                        1e-6 * std::fabs(n.gamma_lambda) + 1e-9);
                REQUIRE(std::fabs(a.v_e - n.v_e) <= 1e-6 * std::fabs(n.v_e) + 1e-9);
                REQUIRE(a.v_lambda == 0.0);
                ++tested;
            } catch (const Error&) {
                continue;
            }
        }
    }
    SECTION("lambda-independence of the second phi coordinate is exact") {
        const ModelParams p = prechaos_params();
        const double fd_v_lambda =
            (phi_map({0.4, 0.5 + 1e-6}, p, 1.0).lambda - phi_map({0.4, 0.5 - 1e-6}, p, 1.0).lambda);
        CHECK(fd_v_lambda == 0.0);
    }
}

TEST_CASE("schur_stability") {
    const ModelParams p = prechaos_params();

    SECTION("rejects non-fixed states") {
        CHECK_THROWS_AS(schur_stability({0.1, 0.9}, p, 0.5), NotAFixedPoint);
    }
    SECTION("mu = 0: triangular Jacobian reduces to the 1-D verdict") {
        const auto fps2 = fixed_points_2d(p, 0.0);
        REQUIRE(fps2.size() == 1);
        CHECK(fps2[0].state.lambda == 0.5);
        const auto fps1 = fixed_points_1d(0.5, p);
        REQUIRE(fps1.size() == 1);
        CHECK_THAT(fps2[0].state.e, WithinAbs(fps1[0].e_star, 1e-9));
        const StabilityReport& r = fps2[0].report;
        CHECK(r.jacobian.det == 0.0);
        CHECK(r.stable == (fps1[0].classification == Classification::Stable));
    }
    SECTION("verdict agrees with the spectral radius") {
        for (double mu : {0.0, 0.4, 1.1, 2.5}) {
            for (const FixedPoint2D& fp : fixed_points_2d(p, mu)) {
                const double rho_spec = fp.report.jacobian.spectral_radius();
                if (std::fabs(rho_spec - 1.0) <= 1e-10) continue;
                CHECK(fp.report.stable == (rho_spec < 1.0));
            }
        }
    }
    SECTION("the l1 bound implies all three Schur quantities are positive") {
        for (double mu : {0.0, 0.3, 0.8, 1.6, 2.4}) {
            for (const FixedPoint2D& fp : fixed_points_2d(p, mu)) {
                const Jacobian2D& j = fp.report.jacobian;
                if (std::fabs(j.trace) + std::fabs(j.det) >= 1.0) continue;
                REQUIRE(fp.report.schur_1 > 0.0);
                REQUIRE(fp.report.schur_2 > 0.0);
                REQUIRE(fp.report.schur_3 > 0.0);
            }
        }
    }
    SECTION("near the 1-D flip the nearest curve is the flip curve") {
        // the flip of the lambda = 1/2 map sits near sigma = 6.11
        ModelParams near_flip = fig_params(6.0);
        const auto fps = fixed_points_2d(near_flip, 0.0);
        REQUIRE_FALSE(fps.empty());
        CHECK(fps[0].report.nearest_bifurcation == BifurcationCurve::Flip);
        CHECK(fps[0].report.nearest_residual < 0.1);
    }
    SECTION("stable verdict implies perturbation orbits converge back") {
        const auto fps = fixed_points_2d(p, 0.8);
        REQUIRE_FALSE(fps.empty());
        REQUIRE(fps[0].report.stable);
        State2D s{fps[0].state.e + 1e-4, std::min(1.0, fps[0].state.lambda + 1e-4)};
        bool converged = false;
        for (int t = 0; t < 10000 && !converged; ++t) {
            s = phi_map(s, p, 0.8);
            converged = std::fabs(s.e - fps[0].state.e) < 1e-6 &&
                        std::fabs(s.lambda - fps[0].state.lambda) < 1e-6;
        }
        CHECK(converged);
    }
}

TEST_CASE("mu_threshold") {
    const ModelParams p = prechaos_params();

    SECTION("formula identities and conservative ordering") {
        const auto fps = fixed_points_2d(p, 0.2);
        REQUIRE_FALSE(fps.empty());
        const MuThreshold mt = mu_threshold(fps[0].state, p);
        CHECK_FALSE(mt.unbounded);
        CHECK(mt.g_star < 1.0);
        CHECK(mt.h_star > 0.0);
        // mu_bar = (4 p_e / I)(1 - g*)/h*: the reciprocal-in-h and
        // vanishing-at-g*->1 behaviour is the formula itself
        CHECK_THAT(mt.mu_bar_at_point * mt.h_star / (1.0 - mt.g_star),
                   WithinRel(4.0 * p.price_education / p.income, 1e-12));
        CHECK(mt.g_hat >= mt.g_star - 1e-12);
        CHECK(mt.h_hat >= mt.h_star - 1e-12);
        CHECK(mt.mu_bar_conservative <= mt.mu_bar_at_point + 1e-12);
    }
    SECTION("stability below the threshold") {
        // a set where the conservative bound stays positive
        ModelParams q = p;
        q.sigma = 1.5;
        q.sigma_pi = 1.5;
        const auto fps = fixed_points_2d(q, 0.3);
        REQUIRE_FALSE(fps.empty());
        const MuThreshold mt = mu_threshold(fps[0].state, q);
        REQUIRE(mt.mu_bar_conservative > 0.0);

        // 0.9 of the conservative threshold: the relocated fixed point must
        // still be below its own bound and report stable
        const double mu_low = 0.9 * mt.mu_bar_conservative;
        const auto fps_low = fixed_points_2d(q, mu_low);
        REQUIRE_FALSE(fps_low.empty());
        REQUIRE(mu_low < mu_threshold(fps_low[0].state, q).mu_bar_conservative);
        CHECK(fps_low[0].report.stable);

        // 0.9 of the at-point threshold, where the bound is self-consistent
        const double mu_high = 0.9 * mt.mu_bar_at_point;
        const auto fps_high = fixed_points_2d(q, mu_high);
        REQUIRE_FALSE(fps_high.empty());
        if (mu_high < mu_threshold(fps_high[0].state, q).mu_bar_at_point)
            CHECK(fps_high[0].report.stable);
    }
    SECTION("|Gamma_E| >= 1 is refused") {
        const ModelParams chaotic = fig_params(16.5);
        const auto fps = fixed_points_2d(chaotic, 0.0);
        REQUIRE_FALSE(fps.empty());
        CHECK_THROWS_AS(mu_threshold(fps[0].state, chaotic), GStarNotBelowOne);
    }
}

TEST_CASE("fixed_points_2d") {
    const ModelParams p = prechaos_params();

    SECTION("residuals are tight and lambda solves the switching equation") {
        for (double mu : {0.0, 0.5, 1.5}) {
            const auto fps = fixed_points_2d(p, mu);
            REQUIRE_FALSE(fps.empty());
            for (const FixedPoint2D& fp : fps) {
                const State2D img = phi_map(fp.state, p, mu);
                REQUIRE(std::fabs(img.e - fp.state.e) <= 1e-10);
                REQUIRE(std::fabs(img.lambda - fp.state.lambda) <= 1e-10);
                REQUIRE(fp.state.lambda == switch_share(fp.state.e, p, mu));
            }
        }
    }
    SECTION("stable points attract 1e-3 perturbations") {
        const auto fps = fixed_points_2d(p, 0.5);
        REQUIRE_FALSE(fps.empty());
        for (const FixedPoint2D& fp : fps) {
            if (!fp.report.stable) continue;
            State2D s{fp.state.e + 1e-3, std::min(1.0, fp.state.lambda + 1e-3)};
            bool converged = false;
            for (int t = 0; t < 20000 && !converged; ++t) {
                s = phi_map(s, p, 0.5);
                converged = std::fabs(s.e - fp.state.e) < 1e-6 &&
                            std::fabs(s.lambda - fp.state.lambda) < 1e-6;
            }
            CHECK(converged);
        }
    }
}
