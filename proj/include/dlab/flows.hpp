#pragma once
// Velocity-field constructors: cellular flows A·∇⊥[sin(2πm x₁)sin(2πm x₂)],
// shear flows, spectral rescalings v(x) = −l·u(lx), reflection-symmetry
// checks, and the reparametrized linear flow (rotation/F, 1/F).

#include <optional>

#include "dlab/spectral.hpp"

namespace dlab {

enum class FlowKind { zero, cellular, shear, from_stream, liouvillean };

struct FlowSpec {
    FlowKind kind = FlowKind::cellular;
    int m = 1;          // cells per axis
    double A = 1.0;     // amplitude
    int l = 1;          // extra contraction factor for rescale
    std::optional<ScalarField> stream;  // for from_stream

    // liouvillean kind only
    std::optional<ScalarField> F;
    double rotation = 0.0;
};

// Stream function ψ_m = sin(2πm x₁)sin(2πm x₂) sampled on the grid.
inline ScalarField cellular_stream(int m, const Grid& g) {
    require(g.dim == 2, "cellular_stream: needs dim 2");
    require(g.n >= 8 * m, "cellular_stream: grid does not resolve 2m waves (need n >= 8m)");
    ScalarField psi(g);
    for (int i2 = 0; i2 < g.n; ++i2)
        for (int i1 = 0; i1 < g.n; ++i1)
            psi.at(i2, i1) = std::sin(TWO_PI * m * i1 / g.n) * std::sin(TWO_PI * m * i2 / g.n);
    return psi;
}

inline VelocityField cellular(int m, double A, const Grid& g) {
    SpectrumField psi = to_spectral(cellular_stream(m, g));
    for (auto& z : psi.c) z *= A;
    return perp_gradient(psi);
}

// Shear u = (A sin(2πm x₂), 0).
inline VelocityField shear(int m, double A, const Grid& g) {
    require(g.dim == 2, "shear: needs dim 2");
    require(g.n >= 8 * m, "shear: under-resolved");
    VelocityField u(g);
    for (int i2 = 0; i2 < g.n; ++i2)
        for (int i1 = 0; i1 < g.n; ++i1)
            u.comp[0].at(i2, i1) = A * std::sin(TWO_PI * m * i2 / g.n);
    return u;
}

inline VelocityField from_stream(const ScalarField& psi, double A) {
    SpectrumField P = to_spectral(psi);
    for (auto& z : P.c) z *= A;
    return perp_gradient(P);
}

// v(x) = −l·u(l x): spectral index dilation (mode k of u becomes mode l·k).
inline VelocityField rescale(const VelocityField& u, int l) {
    require(l >= 1, "rescale: l >= 1");
    const Grid& g = u.grid;
    VelocityField v(g);
    for (int c = 0; c < g.dim; ++c) {
        SpectrumField uc = to_spectral(u.comp[c]);
        double peak = 0.0;
        for (const auto& z : uc.c) peak = std::max(peak, std::abs(z));
        SpectrumField vc(g);
        for_each_mode(g, [&](int k1, int k2, std::size_t i, double) {
            if (std::abs(uc.c[i]) <= 1e-14 * peak) return;  // rounding noise
            if (std::abs(k1) * l > g.n / 2 || std::abs(k2) * l > g.n / 2)
                throw Error("rescale: dilated mode exceeds grid Nyquist (aliasing)");
            int K1 = k1 * l, K2 = k2 * l;
            // store into the half-spectrum slot of (K1, K2)
            cplx val = -(double)l * uc.c[i];
            if (K1 < 0 || (K1 == 0 && K2 < 0)) { K1 = -K1; K2 = -K2; val = std::conj(val); }
            int row = g.dim == 2 ? (K2 >= 0 ? K2 : K2 + g.n) : 0;
            vc.c[(std::size_t)row * g.ncols() + K1] += val;
        });
        fft_plan(g).inverse(vc, v.comp[c]);
    }
    return v;
}

// Residual of the reflection symmetry u(R_n x) = R_n u(x), R_n flipping
// coordinate `coord` as x ↦ 1 − x (mod 1) about the cell boundary and
// negating the matching velocity component.
inline double check_symmetry(const VelocityField& u, int coord) {
    const Grid& g = u.grid;
    require(g.dim == 2 && (coord == 0 || coord == 1), "check_symmetry: bad coordinate");
    double worst = 0.0;
    for (int i2 = 0; i2 < g.n; ++i2)
        for (int i1 = 0; i1 < g.n; ++i1) {
            int j1 = coord == 0 ? (g.n - i1) % g.n : i1;
            int j2 = coord == 1 ? (g.n - i2) % g.n : i2;
            for (int c = 0; c < 2; ++c) {
                double lhs = u.comp[c].at(j2, j1);                 // u(R x)
                double rhs = (c == coord ? -1.0 : 1.0) * u.comp[c].at(i2, i1);  // (R u)(x)
                worst = std::max(worst, std::abs(lhs - rhs));
            }
        }
    return worst;
}

// H^s size (physical weights) of the normalized first integral
// φ_m = ψ_m / ||ψ_m||_{L²}; φ_m is annihilated by u_m·∇.
inline double first_integral_probe(int m, double s, const Grid& g) {
    SpectrumField psi = to_spectral(cellular_stream(m, g));
    double l2 = hs_norm(psi, 0.0, NormConvention::physical);
    require(l2 > 0, "first_integral_probe: degenerate stream");
    return hs_norm(psi, s, NormConvention::physical) / l2;
}

// (rotation/F, 1/F): a reparametrized linear flow; not divergence-free.
inline VelocityField liouvillean_field(const ScalarField& F, double rotation) {
    const Grid& g = F.grid;
    require(g.dim == 2, "liouvillean_field: needs dim 2");
    double fmin = F.v[0];
    for (double x : F.v) fmin = std::min(fmin, x);
    require(fmin > 0.0, "liouvillean_field: F must be strictly positive");
    VelocityField u(g);
    for (std::size_t i = 0; i < g.npoints(); ++i) {
        u.comp[0].v[i] = rotation / F.v[i];
        u.comp[1].v[i] = 1.0 / F.v[i];
    }
    return u;
}

struct FlowReport {
    double mean_abs_max = 0.0;   // max over components of |mean|
    double div_l2 = 0.0;         // L² of divergence
    double max_speed = 0.0;
    bool divergence_checked = true;  // false for liouvillean kind
};

inline VelocityField build_flow(const FlowSpec& spec, const Grid& g, FlowReport* rep = nullptr) {
    VelocityField u(g);
    switch (spec.kind) {
        case FlowKind::zero: break;
        case FlowKind::cellular: u = cellular(spec.m, spec.A, g); break;
        case FlowKind::shear: u = shear(spec.m, spec.A, g); break;
        case FlowKind::from_stream:
            require(spec.stream.has_value(), "build_flow: from_stream needs a stream field");
            u = from_stream(*spec.stream, spec.A);
            break;
        case FlowKind::liouvillean:
            require(spec.F.has_value(), "build_flow: liouvillean needs F");
            u = liouvillean_field(*spec.F, spec.rotation);
            break;
    }
    if (spec.l > 1) u = rescale(u, spec.l);
    if (rep) {
        rep->max_speed = u.max_abs();
        for (const auto& c : u.comp) rep->mean_abs_max = std::max(rep->mean_abs_max, std::abs(mean(c)));
        rep->divergence_checked = spec.kind != FlowKind::liouvillean;
        if (rep->divergence_checked)
            rep->div_l2 = hs_norm(divergence(u), 0.0, NormConvention::physical);
    }
    return u;
}

}  // namespace dlab
