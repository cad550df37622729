#pragma once
// Spectral calculus on the half-spectrum representation: Sobolev norms,
// (fractional) Laplacians, derivatives, dealiasing and eigenvalue-shell
// projections.
//
// Two weight conventions coexist for homogeneous Sobolev norms:
//   lattice  : weight |n|^{2s}
//   physical : weight (2π|n|)^{2s}   (the one the evolution code uses, so
//              that d/dt ||θ||² = −2γ||θ||²_{Ḣ^α} holds exactly)

#include <algorithm>

#include "dlab/fft.hpp"

namespace dlab {

enum class NormConvention { lattice, physical };

inline const char* to_string(NormConvention c) {
    return c == NormConvention::lattice ? "lattice" : "physical";
}

// (Σ_{n≠0} |f̂(n)|² w(n)^{2s})^{1/2}; the mean mode is always excluded.
inline double hs_norm(const SpectrumField& f, double s, NormConvention conv) {
    double acc = 0.0;
    double c2pi = conv == NormConvention::physical ? TWO_PI * TWO_PI : 1.0;
    for_each_mode(f.grid, [&](int k1, int k2, std::size_t i, double w) {
        double n2 = (double)k1 * k1 + (double)k2 * k2;
        if (n2 == 0.0) return;
        acc += w * std::norm(f.c[i]) * std::pow(c2pi * n2, s);
    });
    return std::sqrt(acc);
}

// Physical-space L² norm over the unit torus: (∫ f²)^{1/2}.
inline double l2_norm(const ScalarField& f) {
    double acc = 0.0;
    for (double x : f.v) acc += x * x;
    return std::sqrt(acc / (double)f.grid.npoints());
}

inline double mean(const ScalarField& f) {
    double acc = 0.0;
    for (double x : f.v) acc += x;
    return acc / (double)f.grid.npoints();
}

inline void subtract_mean(ScalarField& f) {
    double m = mean(f);
    for (double& x : f.v) x -= m;
}

// L² norm of the mean-free part, computed spectrally.
inline double l2_norm_meanfree(const SpectrumField& f) {
    return hs_norm(f, 0.0, NormConvention::physical);
}

// ((−Δ)^α f)ˆ(n) = (2π|n|)^{2α} f̂(n); physical convention throughout.
inline SpectrumField fractional_laplacian(const SpectrumField& f, double alpha) {
    SpectrumField out(f.grid);
    for_each_mode(f.grid, [&](int k1, int k2, std::size_t i, double) {
        double n2 = (double)k1 * k1 + (double)k2 * k2;
        out.c[i] = n2 == 0.0 ? cplx(0.0) : f.c[i] * std::pow(TWO_PI * TWO_PI * n2, alpha);
    });
    return out;
}

// Multiplier for ∂/∂x_j; odd derivative of the Nyquist mode is zeroed (its
// sign is not representable on the grid).
inline cplx deriv_mult(int k, int n) {
    if (k == n / 2 || k == -n / 2) return cplx(0.0);
    return cplx(0.0, TWO_PI * k);
}

// axis: 0 → ∂/∂x₁, 1 → ∂/∂x₂.
inline SpectrumField derivative(const SpectrumField& f, int axis) {
    require(axis >= 0 && axis < f.grid.dim, "derivative: bad axis");
    SpectrumField out(f.grid);
    int n = f.grid.n;
    for_each_mode(f.grid, [&](int k1, int k2, std::size_t i, double) {
        out.c[i] = f.c[i] * deriv_mult(axis == 0 ? k1 : k2, n);
    });
    return out;
}

// u = ∇⊥ψ = (−∂₂ψ, ∂₁ψ); divergence-free by construction.
inline VelocityField perp_gradient(const SpectrumField& psi) {
    require(psi.grid.dim == 2, "perp_gradient: needs dim 2");
    VelocityField u(psi.grid);
    SpectrumField d2 = derivative(psi, 1), d1 = derivative(psi, 0);
    for (auto& z : d2.c) z = -z;
    fft_plan(psi.grid).inverse(d2, u.comp[0]);
    fft_plan(psi.grid).inverse(d1, u.comp[1]);
    return u;
}

inline SpectrumField divergence(const VelocityField& u) {
    SpectrumField out(u.grid);
    for (int a = 0; a < u.grid.dim; ++a) {
        SpectrumField da = derivative(to_spectral(u.comp[a]), a);
        for (std::size_t i = 0; i < out.c.size(); ++i) out.c[i] += da.c[i];
    }
    return out;
}

// 2/3-rule: zero every mode with any |n_i| > n/3.
inline SpectrumField dealias(const SpectrumField& f) {
    SpectrumField out = f;
    int cut = f.grid.n / 3;
    for_each_mode(f.grid, [&](int k1, int k2, std::size_t i, double) {
        if (std::abs(k1) > cut || std::abs(k2) > cut) out.c[i] = cplx(0.0);
    });
    return out;
}

inline void dealias_inplace(SpectrumField& f) {
    int cut = f.grid.n / 3;
    for_each_mode(f.grid, [&](int k1, int k2, std::size_t i, double) {
        if (std::abs(k1) > cut || std::abs(k2) > cut) f.c[i] = cplx(0.0);
    });
}

// N-th distinct eigenvalue of −Δ on the torus: (2π)² times the N-th distinct
// nonzero value of |n|² representable on the grid.
inline double laplacian_eigenvalue(const Grid& g, int N) {
    require(N >= 1, "laplacian_eigenvalue: N >= 1");
    std::vector<double> shells;
    for_each_mode(g, [&](int k1, int k2, std::size_t, double) {
        double n2 = (double)k1 * k1 + (double)k2 * k2;
        if (n2 > 0) shells.push_back(n2);
    });
    std::sort(shells.begin(), shells.end());
    shells.erase(std::unique(shells.begin(), shells.end()), shells.end());
    require(N <= (int)shells.size(), "laplacian_eigenvalue: N beyond grid resolution");
    return TWO_PI * TWO_PI * shells[(std::size_t)N - 1];
}

// Orthogonal projection onto span of eigenfunctions with (2π|n|)² ≤ λ_N.
inline SpectrumField project_modes(const SpectrumField& f, int N) {
    double lam = laplacian_eigenvalue(f.grid, N);
    SpectrumField out = f;
    for_each_mode(f.grid, [&](int k1, int k2, std::size_t i, double) {
        double ev = TWO_PI * TWO_PI * ((double)k1 * k1 + (double)k2 * k2);
        if (ev > lam) out.c[i] = cplx(0.0);
    });
    return out;
}

// Largest |coefficient| among modes with any |n_i| at the grid cutoff n/2 or
// just below; used to warn when a field is under-resolved.
inline double spectral_tail(const SpectrumField& f) {
    double tail = 0.0;
    int n = f.grid.n;
    for_each_mode(f.grid, [&](int k1, int k2, std::size_t i, double) {
        if (std::abs(k1) >= n / 2 - 1 || std::abs(k2) >= n / 2 - 1)
            tail = std::max(tail, std::abs(f.c[i]));
    });
    return tail;
}

// C² norm surrogate: grid max of |u|, of the Frobenius norm of ∇u and of
// ∇²u (spectral derivatives), summed.  Throws if the velocity spectrum has
// not decayed at the grid cutoff.
inline double c2_norm(const VelocityField& u) {
    const Grid& g = u.grid;
    std::size_t np = g.npoints();
    std::vector<double> a0(np, 0.0), a1(np, 0.0), a2(np, 0.0);
    double scale = 0.0;
    for (int c = 0; c < g.dim; ++c) {
        SpectrumField uc = to_spectral(u.comp[c]);
        for (const auto& z : uc.c) scale = std::max(scale, std::abs(z));
        if (spectral_tail(uc) > 1e-6 * std::max(scale, 1.0))
            throw Error("c2_norm: velocity spectrum not resolved at grid cutoff");
        for (std::size_t i = 0; i < np; ++i) a0[i] += sq(u.comp[c].v[i]);
        for (int a = 0; a < g.dim; ++a) {
            SpectrumField d1 = derivative(uc, a);
            ScalarField d1p = to_physical(d1);
            for (std::size_t i = 0; i < np; ++i) a1[i] += sq(d1p.v[i]);
            for (int b = 0; b < g.dim; ++b) {
                ScalarField d2p = to_physical(derivative(d1, b));
                for (std::size_t i = 0; i < np; ++i) a2[i] += sq(d2p.v[i]);
            }
        }
    }
    double m0 = 0, m1 = 0, m2 = 0;
    for (std::size_t i = 0; i < np; ++i) {
        m0 = std::max(m0, a0[i]);
        m1 = std::max(m1, a1[i]);
        m2 = std::max(m2, a2[i]);
    }
    return std::sqrt(m0) + std::sqrt(m1) + std::sqrt(m2);
}

}  // namespace dlab
