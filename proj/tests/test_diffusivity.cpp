#include <catch2/catch_amalgamated.hpp>

#include "dlab/diffusivity.hpp"
#include "dlab/flows.hpp"

using namespace dlab;

namespace {
Grid g64{2, 64};
}

TEST_CASE("velocity sampler: spectral evaluation matches grid values exactly") {
    VelocityField u = cellular(1, 3.0, g64);
    VelocitySampler sp(u);
    REQUIRE(sp.spectral_exact());
    double h = g64.h();
    double worst = 0.0;
    for (int i2 = 0; i2 < 64; i2 += 7)
        for (int i1 = 0; i1 < 64; i1 += 7) {
            auto v = sp.eval(i1 * h, i2 * h);
            worst = std::max(worst, std::abs(v[0] - u.comp[0].at(i2, i1)));
            worst = std::max(worst, std::abs(v[1] - u.comp[1].at(i2, i1)));
        }
    REQUIRE(worst < 1e-12);

    // off-grid: compare against the closed form u = A grad^perp[sin sin]
    auto exact = [](double x1, double x2) {
        return std::array<double, 2>{-3.0 * TWO_PI * std::sin(TWO_PI * x1) * std::cos(TWO_PI * x2),
                                     3.0 * TWO_PI * std::cos(TWO_PI * x1) * std::sin(TWO_PI * x2)};
    };
    auto v = sp.eval(0.123, 0.777);
    auto e = exact(0.123, 0.777);
    REQUIRE(std::abs(v[0] - e[0]) < 1e-10);
    REQUIRE(std::abs(v[1] - e[1]) < 1e-10);

    // periodic wrap and negative arguments
    auto v2 = sp.eval(0.123 - 3.0, 0.777 + 2.0);
    REQUIRE(std::abs(v2[0] - e[0]) < 1e-10);

    // bilinear fallback agrees on grid points and to O(h^2) off grid
    VelocitySampler bl(u, true);
    REQUIRE_FALSE(bl.spectral_exact());
    auto vb = bl.eval(17 * h, 23 * h);
    REQUIRE(std::abs(vb[0] - u.comp[0].at(23, 17)) < 1e-12);
    auto vo = bl.eval(0.123, 0.777);
    REQUIRE(std::abs(vo[0] - e[0]) < 10.0 * TWO_PI * 3.0 * g64.h() * g64.h() * 40.0);
}

TEST_CASE("sde config validation") {
    VelocityField u = cellular(1, 3.0, g64);  // max speed 6*pi ~ 18.8
    SdeConfig bad;
    bad.dt = 0.05;  // violates dt <= 0.1/(1+||u||)
    REQUIRE_THROWS_AS(simulate_sde(u, {0, 0}, bad), Error);
    bad.dt = 1e-3;
    bad.paths = 10;
    REQUIRE_THROWS_AS(simulate_sde(u, {0, 0}, bad), Error);
    bad.paths = 200;
    bad.T = 0.05;  // < 100 dt
    REQUIRE_THROWS_AS(simulate_sde(u, {0, 0}, bad), Error);
}

TEST_CASE("pure brownian motion recovers unit diffusivity") {
    VelocityField u(g64);  // zero field
    SdeConfig cfg;
    cfg.dt = 2e-3;
    cfg.T = 4.0;
    cfg.paths = 3000;
    cfg.seed = 11;
    MsdSeries s = simulate_sde(u, {0.0, 0.0}, cfg);
    // MSD should track 2t in each direction across the whole series
    for (std::size_t i = 0; i < s.t.size(); ++i) {
        REQUIRE(std::abs(s.msd[0][i] - 2.0 * s.t[i]) < 6.0 * s.sem[0][i] + 1e-12);
        REQUIRE(std::abs(s.msd[1][i] - 2.0 * s.t[i]) < 6.0 * s.sem[1][i] + 1e-12);
    }
    DirectionalEstimate e = fit_msd(s, 0);
    REQUIRE(e.r2 > 0.98);
    REQUIRE(e.horizon_ok);
    REQUIRE(std::abs(e.D - 1.0) < std::max(3.0 * e.ci_half, 0.05));

    // determinism: same seed gives bit-identical series
    MsdSeries s2 = simulate_sde(u, {0.0, 0.0}, cfg);
    REQUIRE(s2.msd[0] == s.msd[0]);
    REQUIRE(s2.msd[1] == s.msd[1]);
    // different seed gives a different but statistically consistent series
    SdeConfig alt = cfg;
    alt.seed = 12;
    MsdSeries s3 = simulate_sde(u, {0.0, 0.0}, alt);
    REQUIRE(s3.msd[0] != s.msd[0]);
}

TEST_CASE("cell-problem oracle: zero and shear closed forms") {
    VelocityField zero(g64);
    REQUIRE(effective_diffusivity_cell(zero, 0) == 1.0);

    // u = (A sin(2 pi x2), 0): chi_1 = -A sin(2 pi x2)/(4 pi^2),
    // D_11 = 1 + A^2/(8 pi^2); with A = 2 pi this is exactly 1.5.
    VelocityField sh = shear(1, TWO_PI, g64);
    bool ok = false;
    double d = effective_diffusivity_cell(sh, 0, &ok);
    REQUIRE(ok);
    REQUIRE(d == Catch::Approx(1.5).epsilon(1e-8));
    // transverse direction is unenhanced
    REQUIRE(effective_diffusivity_cell(sh, 1) == Catch::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("cell-problem oracle: cellular flow enhances both directions equally") {
    VelocityField u = cellular(1, 4.0, g64);
    double d0 = effective_diffusivity_cell(u, 0);
    double d1 = effective_diffusivity_cell(u, 1);
    REQUIRE(d0 > 1.3);
    REQUIRE(d0 == Catch::Approx(d1).epsilon(1e-8));

    // enhancement grows with amplitude
    double dbig = effective_diffusivity_cell(cellular(1, 12.0, g64), 0);
    REQUIRE(dbig > d0 + 0.5);
}

TEST_CASE("monte carlo matches the cell-problem oracle for a cellular flow") {
    VelocityField u = cellular(1, 4.0, g64);
    double oracle = effective_diffusivity_cell(u, 0);
    SdeConfig cfg;
    cfg.dt = 2e-3;  // max speed 8 pi ~ 25: 0.1/26 ~ 3.8e-3
    cfg.T = 30.0;
    cfg.paths = 4000;
    cfg.seed = 7;
    bool indep = false;
    DirectionalEstimate e = effective_diffusivity_mc(u, 0, cfg, &indep);
    INFO("mc D=" << e.D << " +- " << e.ci_half << " oracle=" << oracle);
    REQUIRE(e.horizon_ok);
    REQUIRE(indep);
    REQUIRE(std::abs(e.D - oracle) < std::max(3.0 * e.ci_half, 0.08 * oracle));
}

TEST_CASE("d_min report: brownian baseline is at least one") {
    VelocityField u(g64);
    SdeConfig cfg;
    cfg.dt = 2e-3;
    cfg.T = 2.0;
    cfg.paths = 1500;
    cfg.seed = 3;
    DiffusivityReport rep = d_min(u, cfg);
    REQUIRE(rep.d_ge_one);
    REQUIRE(rep.oracle_ok[0]);
    REQUIRE(rep.oracle[0] == 1.0);
    REQUIRE(std::abs(rep.D - 1.0) < 0.1);
}
