// Velocity constructors: cellular, shear, rescaling, symmetry, first integrals.
#include <catch2/catch_amalgamated.hpp>

#include "dlab/flows.hpp"

using namespace dlab;

namespace {
double max_pointwise_diff(const VelocityField& a, const VelocityField& b) {
    double w = 0.0;
    for (int c = 0; c < a.grid.dim; ++c)
        for (std::size_t i = 0; i < a.grid.npoints(); ++i)
            w = std::max(w, std::abs(a.comp[c].v[i] - b.comp[c].v[i]));
    return w;
}

double velocity_l2(const VelocityField& u) {
    double acc = 0.0;
    for (const auto& c : u.comp) acc += sq(l2_norm(c));
    return std::sqrt(acc);
}
}  // namespace

TEST_CASE("cellular flow basics") {
    Grid g(2, 64);
    VelocityField u = cellular(1, 1.0, g);
    CHECK(u.max_abs() == Catch::Approx(TWO_PI).epsilon(1e-10));

    VelocityField u2 = cellular(2, 1.0, g);
    CHECK(hs_norm(divergence(u2), 0.0, NormConvention::physical) <= 1e-12 * u2.max_abs());

    VelocityField z = cellular(1, 0.0, g);
    CHECK(z.max_abs() == 0.0);

    CHECK_THROWS_AS(cellular(16, 1.0, Grid(2, 64)), Error);  // n < 8m
}

TEST_CASE("cellular invariants: mean-zero, divergence-free, symmetric") {
    Grid g(2, 64);
    for (int m : {1, 2, 4}) {
        double A = 3.0;
        VelocityField u = cellular(m, A, g);
        for (const auto& c : u.comp) CHECK(std::abs(mean(c)) <= 1e-13 * A);
        CHECK(hs_norm(divergence(u), 0.0, NormConvention::physical) <= 1e-12 * A * m);
        CHECK(check_symmetry(u, 0) <= 1e-10 * A * m);
        CHECK(check_symmetry(u, 1) <= 1e-10 * A * m);
    }
}

TEST_CASE("rescale: sign, dilation identity, norms, aliasing guard") {
    Grid g(2, 64);
    VelocityField u = cellular(1, 1.0, g);

    VelocityField v1 = rescale(u, 1);
    VelocityField mu = u;
    for (auto& c : mu.comp)
        for (auto& x : c.v) x = -x;
    CHECK(max_pointwise_diff(v1, mu) <= 1e-13);

    // -2 u(2x) coincides with the m=2 cellular field, negated
    VelocityField v2 = rescale(u, 2);
    VelocityField c2 = cellular(2, -1.0, g);
    CHECK(max_pointwise_diff(v2, c2) <= 1e-12);

    CHECK(v2.max_abs() == Catch::Approx(2.0 * u.max_abs()).epsilon(1e-12));
    CHECK(velocity_l2(v2) == Catch::Approx(2.0 * velocity_l2(u)).epsilon(1e-12));

    CHECK_THROWS_AS(rescale(u, 40), Error);  // dilated mode beyond Nyquist
}

TEST_CASE("reflection symmetry checks") {
    Grid g(2, 64);
    // the shear is NOT symmetric under the reflection definition: the
    // x1-component is even under x1 -> 1-x1 while the reflection demands odd,
    // so the residual equals 2*max|u1| exactly
    VelocityField s = shear(1, 1.0, g);
    CHECK(check_symmetry(s, 0) == Catch::Approx(2.0).epsilon(1e-10));

    VelocityField u = cellular(1, 1.0, g);
    VelocityField pert = u;
    pert.comp[0].at(3, 5) += 0.1;  // asymmetric bump
    CHECK(check_symmetry(pert, 0) > 1e-3);
}

TEST_CASE("first integral probe: closed form, scaling, linear fit") {
    Grid g(2, 128);
    CHECK(first_integral_probe(1, 1.0, g) ==
          Catch::Approx(2.0 * std::sqrt(2.0) * PI).epsilon(1e-12));
    CHECK(first_integral_probe(1, 0.0, g) == Catch::Approx(1.0).epsilon(1e-13));
    CHECK(first_integral_probe(2, 1.0, g) / first_integral_probe(1, 1.0, g) ==
          Catch::Approx(2.0).epsilon(1e-12));

    // linear in m: R^2 of least-squares fit over m in {1,2,4,8}
    std::vector<double> ms = {1, 2, 4, 8}, ys;
    for (double m : ms) ys.push_back(first_integral_probe((int)m, 1.0, g));
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < ms.size(); ++i) { mx += ms[i]; my += ys[i]; }
    mx /= ms.size(); my /= ms.size();
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < ms.size(); ++i) {
        sxy += (ms[i] - mx) * (ys[i] - my);
        sxx += sq(ms[i] - mx);
        syy += sq(ys[i] - my);
    }
    double r2 = sq(sxy) / (sxx * syy);
    CHECK(r2 >= 0.9999);
}

TEST_CASE("reparametrized linear flow") {
    Grid g(2, 16);
    ScalarField F1(g);
    for (auto& x : F1.v) x = 1.0;
    VelocityField w = liouvillean_field(F1, 0.25);
    CHECK(w.comp[0].v[7] == Catch::Approx(0.25));
    CHECK(w.comp[1].v[7] == Catch::Approx(1.0));

    ScalarField F2(g);
    for (auto& x : F2.v) x = 2.0;
    VelocityField w2 = liouvillean_field(F2, 0.25);
    CHECK(w2.comp[0].v[0] == Catch::Approx(0.125));
    CHECK(w2.comp[1].v[0] == Catch::Approx(0.5));

    ScalarField bad(g);  // zero everywhere
    CHECK_THROWS_AS(liouvillean_field(bad, 0.25), Error);
}

TEST_CASE("build_flow reports") {
    Grid g(2, 64);
    FlowSpec spec;
    spec.kind = FlowKind::cellular;
    spec.m = 2;
    spec.A = 5.0;
    FlowReport rep;
    VelocityField u = build_flow(spec, g, &rep);
    CHECK(rep.divergence_checked);
    CHECK(rep.div_l2 <= 1e-10 * rep.max_speed);
    CHECK(rep.max_speed == Catch::Approx(5.0 * 2 * TWO_PI).epsilon(1e-10));

    FlowSpec lio;
    lio.kind = FlowKind::liouvillean;
    ScalarField F(g);
    for (auto& x : F.v) x = 1.5;
    lio.F = F;
    lio.rotation = 0.21;
    FlowReport lrep;
    build_flow(lio, g, &lrep);
    CHECK_FALSE(lrep.divergence_checked);
}
