#include <catch2/catch_amalgamated.hpp>

#include "dlab/dissipation.hpp"

using namespace dlab;

namespace {
constexpr double PI2 = TWO_PI * TWO_PI;  // (2π)² = 4π²
}

TEST_CASE("operator norm of the pure-diffusion semigroup is the first-shell decay") {
    Grid g(2, 32);
    SECTION("t = 0 is the identity") {
        NormEstimate e = operator_norm(nullptr, g, 1.0, 1.0, 0.0);
        REQUIRE(e.value == 1.0);
        REQUIRE(e.converged);
    }
    SECTION("alpha = 1") {
        double t = 0.01;
        NormEstimate e = operator_norm(nullptr, g, 1.0, 1.0, t);
        REQUIRE(e.converged);
        REQUIRE(e.value == Catch::Approx(std::exp(-PI2 * t)).epsilon(1e-6));
    }
    SECTION("alpha = 2") {
        double t = 2e-4;
        NormEstimate e = operator_norm(nullptr, g, 1.0, 2.0, t);
        REQUIRE(e.converged);
        REQUIRE(e.value == Catch::Approx(std::exp(-PI2 * PI2 * t)).epsilon(1e-6));
    }
    SECTION("Rayleigh history is monotone non-decreasing") {
        NormEstimate e = operator_norm(nullptr, g, 1.0, 1.0, 0.02);
        for (std::size_t i = 1; i < e.history.size(); ++i)
            REQUIRE(e.history[i] >= e.history[i - 1] * (1.0 - 1e-12));
    }
}

TEST_CASE("cellular advection strictly lowers the operator norm") {
    Grid g(2, 64);
    double gamma = 1e-3, t = 0.05;
    NormOptions opt;
    opt.starts = 2;
    VelocityField u = cellular(4, 64.0, g);
    NormEstimate with_flow = operator_norm(&u, g, gamma, 1.0, t, opt);
    double no_flow = std::exp(-gamma * PI2 * t);
    REQUIRE(with_flow.converged);
    REQUIRE(with_flow.value < no_flow);
    REQUIRE(with_flow.value > 0.0);
}

TEST_CASE("pure-diffusion dissipation times match the closed forms") {
    Grid g(2, 32);
    DissipationOptions opt;
    opt.tol = 0.01;
    SECTION("alpha = 1, gamma = 1") {
        DissipationReport r = dissipation_time(nullptr, g, 1.0, 1.0, opt);
        double tau = std::log(2.0) / PI2;
        REQUIRE_FALSE(r.diverged);
        REQUIRE(r.tau == Catch::Approx(tau).epsilon(0.01));
        REQUIRE(r.t_lo < r.tau);
        REQUIRE(r.tau <= r.t_hi);
        REQUIRE(r.t_hi - r.t_lo <= opt.tol * r.t_lo * (1.0 + 1e-12));
        REQUIRE(r.method == "full");
    }
    SECTION("alpha = 2, gamma = 1") {
        DissipationReport r = dissipation_time(nullptr, g, 1.0, 2.0, opt);
        double tau = std::log(2.0) / (PI2 * PI2);
        REQUIRE_FALSE(r.diverged);
        REQUIRE(r.tau == Catch::Approx(tau).epsilon(0.01));
    }
}

TEST_CASE("pure-diffusion dissipation time scales exactly like 1/gamma") {
    Grid g(2, 32);
    DissipationOptions opt;
    opt.tol = 1e-7;
    double ref = 0.0;
    for (double gamma : {1.0, 0.1, 0.01}) {
        DissipationReport r = dissipation_time(nullptr, g, gamma, 1.0, opt);
        double scaled = r.tau * gamma;
        if (ref == 0.0)
            ref = scaled;
        else
            REQUIRE(scaled == Catch::Approx(ref).epsilon(1e-6));
    }
}

TEST_CASE("economized and full engines agree on a mild cellular flow") {
    Grid g(2, 32);
    double gamma = 0.05;
    VelocityField u = cellular(1, 8.0, g);
    DissipationOptions full;
    full.tol = 0.02;
    full.per_decade = 16;
    full.t0 = pure_diffusion_tau(gamma, 1.0) / 8.0;
    DissipationReport rf = dissipation_time_full(&u, g, gamma, 1.0, full);

    DissipationOptions eco;
    eco.economize = true;
    DissipationReport re = dissipation_time(&u, g, gamma, 1.0, eco);

    REQUIRE_FALSE(rf.diverged);
    REQUIRE_FALSE(re.diverged);
    REQUIRE(re.method == "economized");
    REQUIRE(std::isfinite(re.tau));
    // both sit inside each other's bracket up to the combined tolerances
    double tol = rf.tol + re.tol + 0.02;
    REQUIRE(re.tau == Catch::Approx(rf.tau).epsilon(tol));
    // bracket invariants: certified lower bound above 1/2 at t_lo, converged value at t_hi
    REQUIRE(re.t_lo < re.t_hi);
    REQUIRE(re.tau >= re.t_lo);
    REQUIRE(re.tau <= re.t_hi);
    bool hi_converged = false;
    for (const auto& s : re.samples)
        if (s.converged && s.t == re.t_hi && s.norm <= 0.5) hi_converged = true;
    REQUIRE(hi_converged);
}

TEST_CASE("economized engine is deterministic and warm starts reproduce it") {
    Grid g(2, 32);
    double gamma = 0.05;
    VelocityField u = cellular(1, 8.0, g);
    DissipationOptions eco;
    eco.economize = true;
    DissipationReport a = dissipation_time(&u, g, gamma, 1.0, eco);
    DissipationReport b = dissipation_time(&u, g, gamma, 1.0, eco);
    REQUIRE(a.tau == b.tau);  // bit-identical rerun
    REQUIRE(a.total_steps == b.total_steps);

    DissipationOptions warm = eco;
    warm.warm = a.top;
    warm.tau_hint = a.tau;
    DissipationReport c = dissipation_time(&u, g, gamma, 1.0, warm);
    REQUIRE_FALSE(c.diverged);
    REQUIRE(c.tau == Catch::Approx(a.tau).epsilon(a.tol + c.tol));
    REQUIRE(c.total_steps <= a.total_steps);  // warm start can only shorten the cold phases
}

TEST_CASE("tau relation: pure diffusion gives C_min = 1/(4 pi^2)") {
    Grid g(2, 32);
    DissipationOptions opt;
    opt.tol = 0.005;
    TauRelation rel = tau_relation_check(nullptr, g, 1.0, opt);
    REQUIRE(rel.u_c2 == 0.0);
    REQUIRE(rel.c_min == Catch::Approx(1.0 / PI2).epsilon(0.02));
}

TEST_CASE("tau relation stays finite and positive on a cellular flow") {
    Grid g(2, 32);
    VelocityField u = cellular(1, 8.0, g);
    TauRelation rel = tau_relation_check(&u, g, 0.05);
    REQUIRE(rel.u_c2 > 0.0);
    REQUIRE(std::isfinite(rel.c_min));
    REQUIRE(rel.c_min > 0.0);
    REQUIRE(rel.tau2 <= rel.c_min * rel.tau1 * (1.0 + rel.u_c2 * rel.tau1) * (1.0 + 1e-12));
}

TEST_CASE("enhancement sweep: closed-form A = 0 column and monotone trend") {
    Grid g(2, 32);
    double gamma = 0.02;
    DissipationOptions base;
    base.tol = 0.02;
    SweepTable t = enhancement_sweep({1}, {0.0, 8.0, 32.0}, {1.0}, gamma, g, base);
    REQUIRE(t.cells.size() == 3);
    const SweepCell* c0 = t.find(1, 0.0, 1.0);
    REQUIRE(c0 != nullptr);
    REQUIRE_FALSE(c0->failed);
    REQUIRE(c0->rep.tau == Catch::Approx(pure_diffusion_tau(gamma, 1.0)).epsilon(0.02));
    for (const auto& c : t.cells) {
        INFO("m=" << c.m << " A=" << c.A << " err=" << c.error);
        REQUIRE_FALSE(c.failed);
    }
    REQUIRE(t.tau_nonincreasing(1, 1.0));
}

TEST_CASE("rescaling-diagonal amplitude helper") {
    REQUIRE(remark_diagonal_amplitude(1) == 1.0);
    REQUIRE(remark_diagonal_amplitude(4) ==
            Catch::Approx(std::pow(4.0, 2.0 + 15.0 / 113.0)).epsilon(1e-14));
    REQUIRE(remark_diagonal_amplitude(4) > remark_diagonal_amplitude(2));
}
