#pragma once
// Uniform periodic grids on the unit torus [0,1)^d, d = 1 or 2, and the
// real/spectral field containers that live on them.
//
// Spectral fields use the real-to-complex half spectrum: along the fastest
// axis (x1) only wavenumbers 0..n/2 are stored; the remaining modes are
// implied by Hermitian symmetry.  Coefficients are normalized so that
// coeff(0,...,0) equals the mean of the field.

#include <vector>

#include "dlab/common.hpp"

namespace dlab {

struct Grid {
    int dim = 2;  // 1 or 2
    int n = 0;    // points per axis

    Grid() = default;
    Grid(int dim_, int n_) : dim(dim_), n(n_) {
        require(dim == 1 || dim == 2, "Grid: dim must be 1 or 2");
        require(n >= 8 && is_pow2(n), "Grid: n must be a power of two, n >= 8");
    }

    // Real-space points and spectral (half-spectrum) entries.
    std::size_t npoints() const { return dim == 1 ? (std::size_t)n : (std::size_t)n * n; }
    std::size_t ncoeffs() const {
        std::size_t half = (std::size_t)(n / 2 + 1);
        return dim == 1 ? half : (std::size_t)n * half;
    }
    int ncols() const { return n / 2 + 1; }  // stored k1 count
    double h() const { return 1.0 / n; }

    // Signed wavenumber for a full (conjugate-complete) axis index.
    int k_of(int i) const { return i <= n / 2 ? i : i - n; }

    bool operator==(const Grid& o) const { return dim == o.dim && n == o.n; }
};

struct ScalarField {
    Grid grid;
    RealVec v;

    ScalarField() = default;
    explicit ScalarField(const Grid& g) : grid(g), v(g.npoints(), 0.0) {}

    double& at(int i1) { return v[(std::size_t)i1]; }
    double& at(int i2, int i1) { return v[(std::size_t)i2 * grid.n + i1]; }
    double at(int i1) const { return v[(std::size_t)i1]; }
    double at(int i2, int i1) const { return v[(std::size_t)i2 * grid.n + i1]; }
};

struct SpectrumField {
    Grid grid;
    CplxVec c;

    SpectrumField() = default;
    explicit SpectrumField(const Grid& g) : grid(g), c(g.ncoeffs(), cplx(0.0)) {}

    // 1-D access by k1 index (0..n/2).
    cplx& at(int j1) { return c[(std::size_t)j1]; }
    cplx at(int j1) const { return c[(std::size_t)j1]; }
    // 2-D access by (row = full k2 index 0..n-1, col = k1 index 0..n/2).
    cplx& at(int row, int col) { return c[(std::size_t)row * grid.ncols() + col]; }
    cplx at(int row, int col) const { return c[(std::size_t)row * grid.ncols() + col]; }

    // Coefficient at an arbitrary signed wavenumber, resolving Hermitian
    // symmetry for modes outside the stored half spectrum.
    cplx coeff(int k1, int k2 = 0) const {
        int n = grid.n;
        require(std::abs(k1) <= n / 2 && std::abs(k2) <= n / 2, "coeff: wavenumber out of range");
        bool conj = false;
        if (k1 < 0 || (k1 == 0 && k2 < 0) || (k1 == n / 2 && k2 < 0)) {
            k1 = -k1;
            k2 = -k2;
            conj = true;
        }
        if (k1 == -n / 2) k1 = n / 2;  // Nyquist aliases to itself
        cplx z;
        if (grid.dim == 1) {
            z = at(k1);
        } else {
            int row = k2 >= 0 ? k2 : k2 + n;
            z = at(row, k1);
        }
        return conj ? std::conj(z) : z;
    }
};

struct VelocityField {
    Grid grid;
    std::vector<ScalarField> comp;  // dim components

    VelocityField() = default;
    explicit VelocityField(const Grid& g) : grid(g), comp(g.dim, ScalarField(g)) {}

    // sup over grid points of the Euclidean speed |u(x)|
    double max_abs() const {
        double m = 0.0;
        for (std::size_t i = 0; i < grid.npoints(); ++i) {
            double s = 0.0;
            for (const auto& f : comp) s += sq(f.v[i]);
            m = std::max(m, s);
        }
        return std::sqrt(m);
    }
};

// Iterate all stored spectral entries; fn(k1, k2, flat_index, parseval_weight).
// The weight is 2 for modes whose conjugate partner is implied (0 < k1 < n/2)
// and 1 for the self-conjugate columns k1 = 0 and k1 = n/2.
template <class F>
void for_each_mode(const Grid& g, F&& fn) {
    int n = g.n, half = g.ncols();
    if (g.dim == 1) {
        for (int col = 0; col < half; ++col) {
            double w = (col == 0 || col == n / 2) ? 1.0 : 2.0;
            fn(col, 0, (std::size_t)col, w);
        }
    } else {
        for (int row = 0; row < n; ++row) {
            int k2 = g.k_of(row);
            for (int col = 0; col < half; ++col) {
                double w = (col == 0 || col == n / 2) ? 1.0 : 2.0;
                fn(col, k2, (std::size_t)row * half + col, w);
            }
        }
    }
}

}  // namespace dlab
