// Integrating-factor RK4 evolution: exactness, energy identity, adjointness,
// conditional decay and the viscous/inviscid gap bound.
#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "dlab/evolve.hpp"

using namespace dlab;

namespace {

ScalarField mode_field(const Grid& g, int k1, int k2, double amp = 1.0) {
    ScalarField f(g);
    for (int i2 = 0; i2 < g.n; ++i2)
        for (int i1 = 0; i1 < g.n; ++i1)
            f.at(i2, i1) = amp * std::sin(TWO_PI * (k1 * (double)i1 + k2 * (double)i2) / g.n);
    return f;
}

ScalarField smooth_random(const Grid& g, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> nd;
    SpectrumField F(g);
    for_each_mode(g, [&](int k1, int k2, std::size_t i, double) {
        double n2 = (double)k1 * k1 + (double)k2 * k2;
        if (n2 == 0.0 || std::abs(k1) > 5 || std::abs(k2) > 5) return;
        F.c[i] = cplx(nd(rng), nd(rng)) * std::exp(-0.3 * n2);
    });
    ScalarField f = to_physical(F);
    subtract_mean(f);
    return f;
}

double inner(const ScalarField& a, const ScalarField& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.v.size(); ++i) acc += a.v[i] * b.v[i];
    return acc / (double)a.grid.npoints();
}

}  // namespace

TEST_CASE("pure diffusion decays eigenmodes exactly") {
    Grid g(2, 32);
    ScalarField th0 = mode_field(g, 1, 0);
    double n0 = l2_norm(th0);

    EvolveConfig c1;
    c1.alpha = 1.0; c1.gamma = 1.0; c1.T = 0.01;
    auto [th1, tr1] = evolve(th0, nullptr, c1);
    CHECK(l2_norm(th1) == Catch::Approx(std::exp(-4 * PI * PI * 0.01) * n0).epsilon(1e-10));

    EvolveConfig c2;
    c2.alpha = 2.0; c2.gamma = 1.0; c2.T = 0.001;
    auto [th2, tr2] = evolve(th0, nullptr, c2);
    CHECK(l2_norm(th2) ==
          Catch::Approx(std::exp(-std::pow(TWO_PI, 4) * 0.001) * n0).epsilon(1e-10));
}

TEST_CASE("pure transport conserves L2 and min/max") {
    Grid g(2, 64);
    ScalarField th0 = mode_field(g, 1, 0);
    VelocityField u = cellular(1, 0.5, g);
    EvolveConfig c;
    c.gamma = 0.0; c.T = 0.1; c.record_minmax = true; c.sample_stride = 1;
    auto [th, traj] = evolve(th0, &u, c);
    CHECK(l2_norm(th) == Catch::Approx(l2_norm(th0)).epsilon(1e-6));
    CHECK(std::abs(traj.vmax.back() - 1.0) <= 0.01);
    CHECK(std::abs(traj.vmin.back() + 1.0) <= 0.01);
    // self-convergence of the transported state under halved dt
    EvolveConfig ch = c;
    ch.dt = traj.dt / 2.0;
    auto [thh, trajh] = evolve(th0, &u, ch);
    double diff = 0.0;
    for (std::size_t i = 0; i < g.npoints(); ++i)
        diff = std::max(diff, std::abs(th.v[i] - thh.v[i]));
    CHECK(diff <= 1e-5);
}

TEST_CASE("mean conservation and monotone L2 decay") {
    Grid g(2, 64);
    ScalarField th0 = smooth_random(g, 42);
    for (auto& x : th0.v) x += 0.37;  // nonzero mean gets subtracted and reported
    VelocityField u = cellular(2, 3.0, g);
    EvolveConfig c;
    c.alpha = 1.0; c.gamma = 0.05; c.T = 0.1; c.sample_stride = 1;
    auto [th, traj] = evolve(th0, &u, c);
    CHECK(traj.mean_subtracted == Catch::Approx(0.37).margin(1e-12));
    CHECK(std::abs(mean(th)) <= 1e-13);
    for (std::size_t i = 1; i < traj.l2.size(); ++i)
        CHECK(traj.l2[i] <= traj.l2[i - 1] * (1.0 + 1e-10));
}

TEST_CASE("energy residual: exact single mode, transport, advective run") {
    Grid g(2, 32);
    ScalarField th0 = mode_field(g, 1, 0);
    EvolveConfig c;
    c.alpha = 1.0; c.gamma = 0.01; c.T = 0.05; c.dt = 2e-4; c.sample_stride = 1;
    auto traj = evolve(th0, nullptr, c).second;
    CHECK(energy_residual(traj) <= 1e-8);

    EvolveConfig ct;
    ct.gamma = 0.0; ct.T = 0.05; ct.sample_stride = 1;
    Grid g64(2, 64);
    VelocityField u = cellular(1, 1.0, g64);
    auto trt = evolve(mode_field(g64, 1, 0), &u, ct).second;
    CHECK(energy_residual(trt) <= 1e-6);

    // advected + diffusive run: residual small and O(dt^2)
    EvolveConfig ca;
    ca.alpha = 1.0; ca.gamma = 1e-3; ca.T = 0.02; ca.sample_stride = 1; ca.cfl = 0.25;
    VelocityField ua = cellular(1, 10.0, g64);
    auto tra = evolve(mode_field(g64, 1, 0), &ua, ca).second;
    double r1 = energy_residual(tra);
    CHECK(r1 <= 1e-4);
    EvolveConfig cb = ca;
    cb.dt = tra.dt / 2.0;
    auto trb = evolve(mode_field(g64, 1, 0), &ua, cb).second;
    CHECK(energy_residual(trb) <= r1 / 3.5);
}

TEST_CASE("fourth-order self-convergence in dt") {
    Grid g(2, 64);
    ScalarField th0 = smooth_random(g, 5);
    VelocityField u = cellular(1, 1.0, g);
    EvolveConfig c;
    c.alpha = 1.0; c.gamma = 0.01; c.T = 0.05;
    double dt0 = 6.0e-4;
    auto run = [&](double dt) {
        EvolveConfig cc = c;
        cc.dt = dt;
        return evolve(th0, &u, cc).first;
    };
    ScalarField ref = run(dt0 / 8.0), a = run(dt0), b = run(dt0 / 2.0);
    double ea = 0.0, eb = 0.0;
    for (std::size_t i = 0; i < g.npoints(); ++i) {
        ea = std::max(ea, std::abs(a.v[i] - ref.v[i]));
        eb = std::max(eb, std::abs(b.v[i] - ref.v[i]));
    }
    CHECK(ea / eb >= 12.0);
}

TEST_CASE("fixed dt violating the CFL bound is rejected") {
    Grid g(2, 64);
    VelocityField u = cellular(1, 10.0, g);
    EvolveConfig c;
    c.gamma = 0.01; c.T = 0.1; c.dt = 0.01;  // far above 0.5*h/||u||
    CHECK_THROWS_AS(evolve(mode_field(g, 1, 0), &u, c), Error);
}

TEST_CASE("conditional decay check") {
    Grid g(2, 32);
    EvolveConfig c;
    c.alpha = 1.0; c.gamma = 1.0; c.T = 0.02; c.dt = 1e-4; c.sample_stride = 1;
    double N = sq(TWO_PI);

    auto tr1 = evolve(mode_field(g, 1, 0), nullptr, c).second;
    CHECK(conditional_decay_check(tr1, N, 0.0, 0.02) == DecayCheck::holds);
    // single mode saturates the bound with equality
    double lhs = sq(tr1.l2.back());
    double rhs = std::exp(-2.0 * c.gamma * N * 0.02) * sq(tr1.l2.front());
    CHECK(lhs == Catch::Approx(rhs).epsilon(1e-10));

    auto tr2 = evolve(mode_field(g, 2, 0), nullptr, c).second;
    CHECK(conditional_decay_check(tr2, N, 0.0, 0.02) == DecayCheck::holds);
    CHECK(sq(tr2.l2.back()) < std::exp(-2.0 * c.gamma * N * 0.02) * sq(tr2.l2.front()) * 0.99);

    ScalarField mix = mode_field(g, 1, 0);
    ScalarField hi = mode_field(g, 2, 0);
    for (std::size_t i = 0; i < mix.v.size(); ++i) mix.v[i] += hi.v[i];
    auto tr3 = evolve(mix, nullptr, c).second;
    CHECK(conditional_decay_check(tr3, 3.0 * N, 0.0, 0.02) == DecayCheck::inapplicable);
}

TEST_CASE("viscous/inviscid gap: zero case, closed form, inequality") {
    Grid g(2, 64);
    ScalarField th0 = mode_field(g, 1, 0);
    {
        ScalarField two = mode_field(g, 0, 3, 0.5);
        for (std::size_t i = 0; i < th0.v.size(); ++i) th0.v[i] += two.v[i];
    }
    VelocityField u = cellular(1, 10.0, g);

    EvolveConfig c0;
    c0.alpha = 1.0; c0.gamma = 0.0; c0.T = 1.0;
    CHECK(viscous_inviscid_gap(th0, &u, c0, 0.05).gap == 0.0);

    // u = 0: per-mode closed form for the supremum gap at t = tau
    EvolveConfig c1;
    c1.alpha = 1.0; c1.gamma = 0.1; c1.dt = 1e-3;
    double tau = 0.1;
    GapResult r = viscous_inviscid_gap(th0, nullptr, c1, tau);
    auto fac = [&](double n2) { return sq(1.0 - std::exp(-c1.gamma * TWO_PI * TWO_PI * n2 * tau)); };
    double expect = 2.0 * sq(0.5) * fac(1.0) + 2.0 * sq(0.25) * fac(9.0);
    CHECK(r.gap == Catch::Approx(expect).epsilon(1e-10));

    EvolveConfig c2;
    c2.alpha = 1.0; c2.gamma = 1e-3;
    GapResult r2 = viscous_inviscid_gap(th0, &u, c2, 0.1);
    CHECK(r2.gap <= r2.bound_rhs);
    CHECK(r2.gap > 0.0);
}

TEST_CASE("adjoint evolution") {
    Grid g(2, 64);
    EvolveConfig c;
    c.alpha = 1.0; c.gamma = 0.01; c.T = 0.05;

    // u = 0: adjoint equals forward
    ScalarField f = smooth_random(g, 21);
    ScalarField a1 = evolve(f, nullptr, c).first;
    ScalarField a2 = adjoint_evolve(f, nullptr, c);
    for (std::size_t i = 0; i < g.npoints(); i += 97) CHECK(a1.v[i] == a2.v[i]);

    // inner-product adjointness with advection
    VelocityField u = cellular(1, 1.0, g);
    ScalarField gg = smooth_random(g, 22);
    double lhs = inner(evolve(f, &u, c).first, gg);
    double rhs = inner(f, adjoint_evolve(gg, &u, c));
    CHECK(lhs == Catch::Approx(rhs).epsilon(1e-8));
}

TEST_CASE("sparse-flow advection convolution matches the pseudo-spectral product") {
    Grid g{2, 64};
    VelocityField u = cellular(3, 7.0, g);
    AdvectionStepper st(g, &u, 1.0, 0.01, true);
    REQUIRE(st.sparse_advection());

    ScalarField f = smooth_random(g, 99);
    SpectrumField th = to_spectral(f);
    dealias_inplace(th);
    th.c[0] = cplx(0.0);
    SpectrumField got(g);
    st.nonlinear(th, got);

    // reference: dealiased pseudo-spectral −u·∇θ built from the spectral helpers
    ScalarField d1 = to_physical(derivative(th, 0)), d2 = to_physical(derivative(th, 1));
    ScalarField prod(g);
    for (std::size_t i = 0; i < prod.v.size(); ++i)
        prod.v[i] = -(u.comp[0].v[i] * d1.v[i] + u.comp[1].v[i] * d2.v[i]);
    SpectrumField want = to_spectral(prod);
    dealias_inplace(want);
    want.c[0] = cplx(0.0);

    double scale = 0.0, diff = 0.0;
    for (std::size_t i = 0; i < got.c.size(); ++i) {
        scale = std::max(scale, std::abs(want.c[i]));
        diff = std::max(diff, std::abs(got.c[i] - want.c[i]));
    }
    REQUIRE(scale > 1.0);
    REQUIRE(diff < 1e-12 * scale);

    // a dense (non-band-limited) flow must not take the sparse path
    ScalarField psi(g);
    for (int i2 = 0; i2 < g.n; ++i2)
        for (int i1 = 0; i1 < g.n; ++i1)
            psi.at(i2, i1) = std::exp(std::sin(TWO_PI * i1 / g.n)) *
                             std::cos(TWO_PI * 2.0 * i2 / g.n);
    VelocityField dense = from_stream(psi, 1.0);
    AdvectionStepper st2(g, &dense, 1.0, 0.01, true);
    REQUIRE_FALSE(st2.sparse_advection());
}
