#pragma once
// Thin FFTW wrapper with a per-grid plan cache.  Forward transforms divide
// by the number of points so coeff(0) is the field mean; the inverse is then
// an exact round trip.  Field storage is 64-byte aligned and plans execute
// directly on it via the new-array interface; only the inverse stages a copy
// of the spectrum (multidimensional c2r destroys its input).

#include <fftw3.h>

#include <cstring>
#include <map>
#include <memory>

#include "dlab/grid.hpp"

namespace dlab {

class FftPlan {
  public:
    explicit FftPlan(const Grid& g) : grid_(g), scratch_(g.ncoeffs()) {
        std::size_t np = g.npoints(), nc = g.ncoeffs();
        double* r = fftw_alloc_real(np);
        fftw_complex* s = fftw_alloc_complex(nc);
        // FFTW_ESTIMATE, not FFTW_MEASURE: MEASURE picks the algorithm by
        // timing trial runs, so two processes can select different plans and
        // produce different low-order bits — which breaks the byte-identical
        // rerun guarantee of every report writer built on top of this.
        if (g.dim == 1) {
            fwd_ = fftw_plan_dft_r2c_1d(g.n, r, s, FFTW_ESTIMATE);
            inv_ = fftw_plan_dft_c2r_1d(g.n, s, r, FFTW_ESTIMATE);
        } else {
            fwd_ = fftw_plan_dft_r2c_2d(g.n, g.n, r, s, FFTW_ESTIMATE);
            inv_ = fftw_plan_dft_c2r_2d(g.n, g.n, s, r, FFTW_ESTIMATE);
        }
        require(fwd_ && inv_, "FftPlan: fftw plan creation failed");
        fftw_free(r);
        fftw_free(s);
    }
    ~FftPlan() {
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(inv_);
    }
    FftPlan(const FftPlan&) = delete;
    FftPlan& operator=(const FftPlan&) = delete;

    void forward(const ScalarField& f, SpectrumField& out) const {
        require(f.grid == grid_, "forward: grid mismatch");
        if (!(out.grid == grid_)) out = SpectrumField(grid_);
        fftw_execute_dft_r2c(fwd_, const_cast<double*>(f.v.data()),
                             reinterpret_cast<fftw_complex*>(out.c.data()));
        double scale = 1.0 / (double)grid_.npoints();
        for (auto& z : out.c) z *= scale;
    }

    void inverse(const SpectrumField& f, ScalarField& out) const {
        require(f.grid == grid_, "inverse: grid mismatch");
        if (!(out.grid == grid_)) out = ScalarField(grid_);
        std::memcpy(scratch_.data(), f.c.data(), grid_.ncoeffs() * sizeof(cplx));
        fftw_execute_dft_c2r(inv_, reinterpret_cast<fftw_complex*>(scratch_.data()),
                             out.v.data());
    }

  private:
    Grid grid_;
    mutable CplxVec scratch_;
    fftw_plan fwd_, inv_;
};

// Process-wide plan cache keyed by (dim, n).
inline const FftPlan& fft_plan(const Grid& g) {
    static std::map<std::pair<int, int>, std::unique_ptr<FftPlan>> cache;
    auto key = std::make_pair(g.dim, g.n);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, std::make_unique<FftPlan>(g)).first;
    return *it->second;
}

inline SpectrumField to_spectral(const ScalarField& f) {
    SpectrumField out(f.grid);
    fft_plan(f.grid).forward(f, out);
    return out;
}

inline ScalarField to_physical(const SpectrumField& f) {
    ScalarField out(f.grid);
    fft_plan(f.grid).inverse(f, out);
    return out;
}

}  // namespace dlab
