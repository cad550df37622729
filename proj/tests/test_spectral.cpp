// Spectral core: transforms, norms, derivatives, projections.
#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "dlab/field_io.hpp"
#include "dlab/spectral.hpp"

using namespace dlab;

namespace {

ScalarField random_field(const Grid& g, unsigned seed) {
    ScalarField f(g);
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (auto& x : f.v) x = u(rng);
    return f;
}

// Fill values from f(x1) or f(x1, x2).
template <class F>
ScalarField sample(const Grid& g, F&& f) {
    ScalarField out(g);
    if (g.dim == 1) {
        for (int i = 0; i < g.n; ++i) out.at(i) = f((double)i / g.n, 0.0);
    } else {
        for (int i2 = 0; i2 < g.n; ++i2)
            for (int i1 = 0; i1 < g.n; ++i1)
                out.at(i2, i1) = f((double)i1 / g.n, (double)i2 / g.n);
    }
    return out;
}

}  // namespace

TEST_CASE("forward transform matches direct DFT summation on 8x8") {
    Grid g(2, 8);
    ScalarField f = random_field(g, 11);
    SpectrumField F = to_spectral(f);
    // direct O(n^2 * n^2) sum as an independent oracle
    double worst = 0.0;
    for (int k2 = -g.n / 2; k2 <= g.n / 2; ++k2) {
        for (int k1 = -g.n / 2; k1 <= g.n / 2; ++k1) {
            cplx acc(0.0);
            for (int i2 = 0; i2 < g.n; ++i2)
                for (int i1 = 0; i1 < g.n; ++i1) {
                    double ph = -TWO_PI * (k1 * (double)i1 + k2 * (double)i2) / g.n;
                    acc += f.at(i2, i1) * cplx(std::cos(ph), std::sin(ph));
                }
            acc /= (double)g.npoints();
            // Nyquist rows alias (n/2 == -n/2 on the grid)
            cplx got = F.coeff(k1 == -g.n / 2 ? g.n / 2 : k1, k2 == -g.n / 2 ? g.n / 2 : k2);
            if (std::abs(k1) == g.n / 2 || std::abs(k2) == g.n / 2) continue;
            worst = std::max(worst, std::abs(acc - got));
        }
    }
    CHECK(worst <= 1e-12);
    // round trip
    ScalarField back = to_physical(F);
    double rt = 0.0;
    for (std::size_t i = 0; i < g.npoints(); ++i)
        rt = std::max(rt, std::abs(back.v[i] - f.v[i]));
    CHECK(rt <= 1e-12);
}

TEST_CASE("single-mode and constant coefficient identities") {
    Grid g(2, 32);
    ScalarField s = sample(g, [](double x1, double) { return std::sin(TWO_PI * x1); });
    SpectrumField S = to_spectral(s);
    CHECK(std::abs(S.coeff(1, 0) - cplx(0.0, -0.5)) <= 1e-13);
    CHECK(std::abs(S.coeff(-1, 0) - cplx(0.0, 0.5)) <= 1e-13);
    CHECK(std::abs(S.coeff(2, 3)) <= 1e-13);

    ScalarField c(g);
    for (auto& x : c.v) x = 3.0;
    SpectrumField C = to_spectral(c);
    CHECK(std::abs(C.coeff(0, 0) - 3.0) <= 1e-13);
    CHECK(std::abs(C.coeff(1, 0)) <= 1e-13);
}

TEST_CASE("Parseval holds to 1e-12 relative on several grids") {
    for (auto [dim, n] : {std::pair{1, 64}, {2, 8}, {2, 32}, {2, 128}}) {
        Grid g(dim, n);
        ScalarField f = random_field(g, 100 + n + dim);
        double phys2 = 0.0;
        for (double x : f.v) phys2 += x * x;
        phys2 /= (double)g.npoints();
        SpectrumField F = to_spectral(f);
        double spec2 = 0.0;
        for_each_mode(g, [&](int, int, std::size_t i, double w) { spec2 += w * std::norm(F.c[i]); });
        CHECK(std::abs(phys2 - spec2) <= 1e-12 * phys2);
    }
}

TEST_CASE("hs_norm conventions and zero-mode exclusion") {
    Grid g(2, 32);
    SpectrumField S = to_spectral(sample(g, [](double x1, double) { return std::sin(TWO_PI * x1); }));
    CHECK(hs_norm(S, 1.0, NormConvention::lattice) == Catch::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
    CHECK(hs_norm(S, 1.0, NormConvention::physical) == Catch::Approx(TWO_PI / std::sqrt(2.0)).epsilon(1e-12));

    // s = 0 equals L2 norm of the mean-free part
    ScalarField f = random_field(g, 7);
    SpectrumField F = to_spectral(f);
    ScalarField mf = f;
    subtract_mean(mf);
    CHECK(hs_norm(F, 0.0, NormConvention::lattice) == Catch::Approx(l2_norm(mf)).epsilon(1e-12));
    CHECK(hs_norm(F, 0.0, NormConvention::physical) ==
          Catch::Approx(hs_norm(F, 0.0, NormConvention::lattice)).epsilon(1e-14));
}

TEST_CASE("fractional laplacian: eigenfunctions and order-1 finite-difference cross-check") {
    Grid g(2, 32);
    SpectrumField S = to_spectral(sample(g, [](double x1, double) { return std::sin(TWO_PI * x1); }));
    ScalarField l1 = to_physical(fractional_laplacian(S, 1.0));
    ScalarField l2f = to_physical(fractional_laplacian(S, 2.0));
    ScalarField s = to_physical(S);
    double w1 = 0.0, w2 = 0.0;
    for (std::size_t i = 0; i < g.npoints(); ++i) {
        w1 = std::max(w1, std::abs(l1.v[i] - TWO_PI * TWO_PI * s.v[i]));
        w2 = std::max(w2, std::abs(l2f.v[i] - std::pow(TWO_PI, 4) * s.v[i]));
    }
    CHECK(w1 <= 1e-10);
    CHECK(w2 <= 1e-8);

    // alpha = 1 agrees with second differences for a band-limited 1-D field
    Grid g1(1, 256);
    ScalarField f = sample(g1, [](double x, double) {
        return std::sin(TWO_PI * x) + 0.3 * std::cos(3 * TWO_PI * x);
    });
    ScalarField lap = to_physical(fractional_laplacian(to_spectral(f), 1.0));
    double h = g1.h(), rel = 0.0, scale = 0.0;
    for (int i = 0; i < g1.n; ++i) scale = std::max(scale, std::abs(lap.at(i)));
    for (int i = 0; i < g1.n; ++i) {
        double fd = -(f.at((i + 1) % g1.n) - 2 * f.at(i) + f.at((i + g1.n - 1) % g1.n)) / (h * h);
        rel = std::max(rel, std::abs(fd - lap.at(i)) / scale);
    }
    CHECK(rel <= 1e-3);
}

TEST_CASE("perp gradient of the basic stream function; divergence-free") {
    Grid g(2, 64);
    SpectrumField psi = to_spectral(sample(g, [](double a, double b) {
        return std::sin(TWO_PI * a) * std::sin(TWO_PI * b);
    }));
    VelocityField u = perp_gradient(psi);
    double worst = 0.0;
    for (int i2 = 0; i2 < g.n; ++i2)
        for (int i1 = 0; i1 < g.n; ++i1) {
            double a = TWO_PI * i1 / g.n, b = TWO_PI * i2 / g.n;
            worst = std::max(worst, std::abs(u.comp[0].at(i2, i1) + TWO_PI * std::sin(a) * std::cos(b)));
            worst = std::max(worst, std::abs(u.comp[1].at(i2, i1) - TWO_PI * std::cos(a) * std::sin(b)));
        }
    CHECK(worst <= 1e-10);

    // divergence bound relative to the gradient size, random stream function
    ScalarField rnd = random_field(g, 3);
    SpectrumField rpsi = dealias(to_spectral(rnd));
    VelocityField v = perp_gradient(rpsi);
    double div = hs_norm(divergence(v), 0.0, NormConvention::physical);
    double gsz = hs_norm(rpsi, 1.0, NormConvention::physical);
    CHECK(div <= 1e-12 * gsz);
}

TEST_CASE("dealias and eigenvalue-shell projection masks") {
    Grid g(2, 32);
    SpectrumField F = to_spectral(random_field(g, 5));
    SpectrumField D = dealias(F);
    int cut = g.n / 3;
    for_each_mode(g, [&](int k1, int k2, std::size_t i, double) {
        if (std::abs(k1) > cut || std::abs(k2) > cut)
            CHECK(std::abs(D.c[i]) == 0.0);
        else
            CHECK(D.c[i] == F.c[i]);
    });

    CHECK(laplacian_eigenvalue(g, 1) == Catch::Approx(TWO_PI * TWO_PI));
    CHECK(laplacian_eigenvalue(g, 2) == Catch::Approx(2 * TWO_PI * TWO_PI));

    SpectrumField s1 = to_spectral(sample(g, [](double a, double) { return std::sin(TWO_PI * a); }));
    SpectrumField p1 = project_modes(s1, 1);
    double diff = 0.0;
    for (std::size_t i = 0; i < s1.c.size(); ++i) diff = std::max(diff, std::abs(p1.c[i] - s1.c[i]));
    CHECK(diff <= 1e-14);

    SpectrumField s4 = to_spectral(sample(g, [](double a, double) { return std::sin(4 * TWO_PI * a); }));
    SpectrumField p4 = project_modes(s4, 1);
    CHECK(hs_norm(p4, 0.0, NormConvention::lattice) <= 1e-14);
}

TEST_CASE("c2 norm: closed form for the basic cellular velocity, homogeneity, zero") {
    Grid g(2, 64);
    SpectrumField psi = to_spectral(sample(g, [](double a, double b) {
        return std::sin(TWO_PI * a) * std::sin(TWO_PI * b);
    }));
    VelocityField u = perp_gradient(psi);
    CHECK(u.max_abs() == Catch::Approx(TWO_PI).epsilon(1e-10));
    // max|u| + max|Du|_F + max|D^2 u|_F = 2pi + sqrt(2)(2pi)^2 + 2(2pi)^3
    double expect = TWO_PI + std::sqrt(2.0) * sq(TWO_PI) + 2.0 * std::pow(TWO_PI, 3);
    CHECK(c2_norm(u) == Catch::Approx(expect).epsilon(1e-10));

    VelocityField au = u;
    for (auto& cpn : au.comp)
        for (auto& x : cpn.v) x *= 7.5;
    CHECK(c2_norm(au) == Catch::Approx(7.5 * c2_norm(u)).epsilon(1e-12));

    VelocityField z(g);
    CHECK(c2_norm(z) == 0.0);
}

TEST_CASE("field serialization round trip") {
    Grid g(2, 16);
    ScalarField f = random_field(g, 9);
    std::string path = "roundtrip_field.bin";
    save_field(f, path, "test");
    ScalarField f2 = load_field(path);
    REQUIRE(f2.grid == g);
    for (std::size_t i = 0; i < g.npoints(); ++i) CHECK(f2.v[i] == f.v[i]);
    std::remove(path.c_str());
}
