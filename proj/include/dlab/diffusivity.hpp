#pragma once
// Effective diffusivity D_e(u): Monte Carlo on the SDE
//   dX = √2 dB − u(X) dt
// (Euler–Maruyama, counter-based noise, positions unwrapped in R^d), plus a
// homogenization cell-problem oracle  −Δχ + u·∇χ = −u·e,  D_e = 1 + ||∇χ||².

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "dlab/fft.hpp"
#include "dlab/flows.hpp"
#include "dlab/rng.hpp"
#include "dlab/spectral.hpp"

namespace dlab {

// Point evaluator for a velocity field.  Fields with few Fourier modes are
// evaluated spectrally (exact); dense fields fall back to bilinear
// interpolation on the grid.
class VelocitySampler {
  public:
    explicit VelocitySampler(const VelocityField& u, bool force_bilinear = false)
        : u_(&u), g_(u.grid) {
        if (force_bilinear) return;
        std::vector<std::vector<Mode>> modes(g_.dim);
        bool sparse = true;
        for (int c = 0; c < g_.dim && sparse; ++c) {
            SpectrumField uc = to_spectral(u.comp[c]);
            double peak = 0.0;
            for (const auto& z : uc.c) peak = std::max(peak, std::abs(z));
            for_each_mode(g_, [&](int k1, int k2, std::size_t i, double w) {
                if (std::abs(uc.c[i]) <= 1e-13 * peak) return;
                modes[c].push_back({(double)k1, (double)k2, uc.c[i], w});
            });
            if (modes[c].size() > 64) sparse = false;
        }
        if (sparse) modes_ = std::move(modes);
    }

    bool spectral_exact() const { return !modes_.empty(); }

    // u(x) with x taken mod 1 per component
    std::array<double, 2> eval(double x1, double x2) const {
        std::array<double, 2> out = {0.0, 0.0};
        if (spectral_exact()) {
            for (int c = 0; c < g_.dim; ++c) {
                double acc = 0.0;
                for (const auto& m : modes_[c]) {
                    double ph = TWO_PI * (m.k1 * x1 + m.k2 * x2);
                    // weight 2 counts the implied conjugate mode
                    acc += m.w * (m.coef.real() * std::cos(ph) - m.coef.imag() * std::sin(ph));
                }
                out[c] = acc;
            }
            return out;
        }
        // bilinear interpolation with periodic wrap
        int n = g_.n;
        double f1 = (x1 - std::floor(x1)) * n, f2 = (x2 - std::floor(x2)) * n;
        int i1 = (int)f1 % n, i2 = (int)f2 % n;
        double a = f1 - std::floor(f1), b = f2 - std::floor(f2);
        int j1 = (i1 + 1) % n, j2 = (i2 + 1) % n;
        for (int c = 0; c < g_.dim; ++c) {
            const ScalarField& f = u_->comp[c];
            out[c] = (1 - a) * (1 - b) * f.at(i2, i1) + a * (1 - b) * f.at(i2, j1) +
                     (1 - a) * b * f.at(j2, i1) + a * b * f.at(j2, j1);
        }
        return out;
    }

  private:
    struct Mode {
        double k1, k2;
        cplx coef;
        double w;
    };
    const VelocityField* u_;
    Grid g_;
    std::vector<std::vector<Mode>> modes_;
};

struct SdeConfig {
    double dt = 1e-3;
    double T = 10.0;
    long paths = 10000;
    std::uint64_t seed = 0;
    bool force_bilinear = false;
    int batches = 20;  // independent path batches for confidence intervals
};

inline void validate(const SdeConfig& cfg, double max_speed) {
    require(cfg.dt > 0 && cfg.dt <= 0.1 / (1.0 + max_speed),
            "SdeConfig: dt must satisfy dt <= 0.1/(1+||u||)");
    require(cfg.paths >= 100, "SdeConfig: need at least 100 paths");
    require(cfg.T >= 100.0 * cfg.dt, "SdeConfig: need T >= 100 dt");
}

struct MsdSeries {
    std::vector<double> t;                           // sample times (log-spaced)
    std::array<std::vector<double>, 2> msd;          // E[((X_t - x0)·e)²] per direction
    std::array<std::vector<double>, 2> sem;          // standard error of the mean
    // per-batch MSD at each sample time, for batch-level slope CIs
    std::array<std::vector<std::vector<double>>, 2> batch_msd;
    long paths = 0;
    int dim = 2;
};

inline MsdSeries simulate_sde(const VelocityField& u, std::array<double, 2> x0,
                              const SdeConfig& cfg) {
    const int dim = u.grid.dim;
    VelocitySampler samp(u, cfg.force_bilinear);
    validate(cfg, u.max_abs());
    long steps = (long)std::llround(cfg.T / cfg.dt);

    // log-spaced sample steps, ~16 per decade
    std::vector<long> sample_at;
    double t_min = std::max(10.0 * cfg.dt, cfg.T * 1e-3);
    for (double t = t_min; t < cfg.T * 0.9999; t *= std::pow(10.0, 1.0 / 16.0))
        sample_at.push_back((long)std::llround(t / cfg.dt));
    sample_at.push_back(steps);
    sample_at.erase(std::unique(sample_at.begin(), sample_at.end()), sample_at.end());

    MsdSeries out;
    out.dim = dim;
    out.paths = cfg.paths;
    for (long s : sample_at) out.t.push_back((double)s * cfg.dt);
    std::size_t ns = sample_at.size();
    int B = std::max(1, cfg.batches);
    for (int c = 0; c < dim; ++c) {
        out.msd[c].assign(ns, 0.0);
        out.sem[c].assign(ns, 0.0);
        out.batch_msd[c].assign((std::size_t)B, std::vector<double>(ns, 0.0));
    }
    std::array<std::vector<double>, 2> m2;  // running sum of squares for SEM
    for (int c = 0; c < dim; ++c) m2[c].assign(ns, 0.0);

    CounterRng rng{cfg.seed};
    double root = std::sqrt(2.0 * cfg.dt);
    for (long p = 0; p < cfg.paths; ++p) {
        double x = x0[0], y = x0[1];
        std::size_t si = 0;
        for (long k = 0; k < steps && si < ns; ++k) {
            auto [z1, z2] = rng.normal_pair((std::uint64_t)p, (std::uint64_t)k);
            auto uv = samp.eval(x, y);
            x += root * z1 - uv[0] * cfg.dt;
            if (dim == 2) y += root * z2 - uv[1] * cfg.dt;
            if (k + 1 == sample_at[si]) {
                double d[2] = {x - x0[0], y - x0[1]};
                for (int c = 0; c < dim; ++c) {
                    double v = d[c] * d[c];
                    out.msd[c][si] += v;
                    m2[c][si] += v * v;
                    out.batch_msd[c][(std::size_t)(p % B)][si] += v;
                }
                ++si;
            }
        }
    }
    for (int c = 0; c < dim; ++c) {
        for (std::size_t i = 0; i < ns; ++i) {
            double m = out.msd[c][i] / (double)cfg.paths;
            double var = m2[c][i] / (double)cfg.paths - m * m;
            out.msd[c][i] = m;
            out.sem[c][i] = std::sqrt(std::max(0.0, var) / (double)cfg.paths);
        }
        for (auto& bm : out.batch_msd[c])
            for (auto& v : bm) v /= (double)cfg.paths / (double)B;
    }
    return out;
}

struct DirectionalEstimate {
    double D = 0.0;          // fitted slope of MSD/2 vs t (last decade)
    double ci_half = 0.0;    // 95% half-width from batch slopes
    double r2 = 0.0;         // fit quality on the mean curve
    bool horizon_ok = true;  // false when r2 < 0.98
    double fit_t_lo = 0.0, fit_t_hi = 0.0;
};

namespace detail {
// least-squares slope of y on x (with intercept); r2 optional
inline double ls_slope(const std::vector<double>& x, const std::vector<double>& y,
                       double* r2 = nullptr) {
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) { mx += x[i]; my += y[i]; }
    mx /= (double)x.size();
    my /= (double)x.size();
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += sq(x[i] - mx);
        syy += sq(y[i] - my);
    }
    if (r2) *r2 = syy > 0 ? sq(sxy) / (sxx * syy) : 1.0;
    return sxy / sxx;
}
}  // namespace detail

inline DirectionalEstimate fit_msd(const MsdSeries& s, int axis) {
    DirectionalEstimate est;
    double t_hi = s.t.back(), t_lo = t_hi / 10.0;
    std::vector<double> xs, ys;
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < s.t.size(); ++i)
        if (s.t[i] >= t_lo) {
            xs.push_back(s.t[i]);
            ys.push_back(0.5 * s.msd[axis][i]);
            idx.push_back(i);
        }
    require(xs.size() >= 3, "fit_msd: too few samples in the fit window");
    est.fit_t_lo = xs.front();
    est.fit_t_hi = xs.back();
    est.D = detail::ls_slope(xs, ys, &est.r2);
    est.horizon_ok = est.r2 >= 0.98;
    // batch slopes -> CI
    std::size_t B = s.batch_msd[axis].size();
    std::vector<double> slopes;
    for (std::size_t b = 0; b < B; ++b) {
        std::vector<double> yb;
        for (std::size_t j : idx) yb.push_back(0.5 * s.batch_msd[axis][b][j]);
        slopes.push_back(detail::ls_slope(xs, yb));
    }
    double m = 0;
    for (double v : slopes) m += v;
    m /= (double)B;
    double var = 0;
    for (double v : slopes) var += sq(v - m);
    var /= (double)(B - 1);
    est.ci_half = 1.96 * std::sqrt(var / (double)B);
    return est;
}

inline DirectionalEstimate effective_diffusivity_mc(const VelocityField& u, int axis,
                                                    const SdeConfig& cfg,
                                                    bool* x0_independent = nullptr) {
    MsdSeries s1 = simulate_sde(u, {0.0, 0.0}, cfg);
    DirectionalEstimate e1 = fit_msd(s1, axis);
    if (x0_independent) {
        SdeConfig c2 = cfg;
        c2.seed = cfg.seed + 0x5151ULL;
        MsdSeries s2 = simulate_sde(u, {0.37, 0.61}, c2);
        DirectionalEstimate e2 = fit_msd(s2, axis);
        *x0_independent = std::abs(e1.D - e2.D) <= 1.0 * (e1.ci_half + e2.ci_half) + 1e-12;
    }
    return e1;
}

// Homogenization oracle for the cell problem  −Δχ + u·∇χ = −u·e, giving
// D = 1 + ||∇χ||².  Precondition by (−Δ)⁻¹: the system becomes (I+K)χ = b with
// K = (−Δ)⁻¹(u·∇) antisymmetric in the homogeneous-H¹ inner product, so
// (I−K)(I+K) is symmetric positive definite there and plain CG on the normal
// equations converges without tuning (condition number 1 + (||u||/2π)² at worst).
inline double effective_diffusivity_cell(const VelocityField& u, int axis,
                                         bool* converged_out = nullptr) {
    const Grid& g = u.grid;
    require(axis >= 0 && axis < g.dim, "effective_diffusivity_cell: bad axis");
    if (converged_out) *converged_out = true;
    double umax = u.max_abs();
    if (umax == 0.0) return 1.0;

    SpectrumField ue = to_spectral(u.comp[axis]);
    dealias_inplace(ue);
    ue.c[0] = cplx(0.0);

    auto inv_lap = [&](SpectrumField& f) {
        for_each_mode(g, [&](int k1, int k2, std::size_t i, double) {
            double n2 = (double)k1 * k1 + (double)k2 * k2;
            f.c[i] = n2 == 0.0 ? cplx(0.0) : f.c[i] / (TWO_PI * TWO_PI * n2);
        });
    };
    // K χ = (−Δ)⁻¹(u·∇χ), dealiased and mean-free
    auto apply_k = [&](const SpectrumField& chi, SpectrumField& out) {
        ScalarField acc(g), gp(g);
        SpectrumField d(g);
        for (int a = 0; a < g.dim; ++a) {
            for_each_mode(g, [&](int k1, int k2, std::size_t i, double) {
                d.c[i] = chi.c[i] * deriv_mult(a == 0 ? k1 : k2, g.n);
            });
            fft_plan(g).inverse(d, gp);
            for (std::size_t i = 0; i < g.npoints(); ++i) acc.v[i] += u.comp[a].v[i] * gp.v[i];
        }
        fft_plan(g).forward(acc, out);
        dealias_inplace(out);
        out.c[0] = cplx(0.0);
        inv_lap(out);
    };
    // M χ = (I−K)(I+K)χ
    SpectrumField tmp1(g), tmp2(g);
    auto apply_m = [&](const SpectrumField& x, SpectrumField& out) {
        apply_k(x, tmp1);
        for (std::size_t i = 0; i < tmp1.c.size(); ++i) tmp1.c[i] += x.c[i];
        apply_k(tmp1, tmp2);
        for (std::size_t i = 0; i < out.c.size(); ++i) out.c[i] = tmp1.c[i] - tmp2.c[i];
    };
    // homogeneous-H¹ inner product (the constant (2π)² factor is immaterial)
    auto dot_h1 = [&](const SpectrumField& a, const SpectrumField& b) {
        double s = 0.0;
        for_each_mode(g, [&](int k1, int k2, std::size_t i, double w) {
            double n2 = (double)k1 * k1 + (double)k2 * k2;
            s += w * n2 *
                 (a.c[i].real() * b.c[i].real() + a.c[i].imag() * b.c[i].imag());
        });
        return s;
    };

    // rhs of the normal equations: (I−K)b with b = −(−Δ)⁻¹ u_e
    SpectrumField b(g);
    for (std::size_t i = 0; i < b.c.size(); ++i) b.c[i] = -ue.c[i];
    inv_lap(b);
    if (dot_h1(b, b) == 0.0) return 1.0;
    SpectrumField rhs(g);
    apply_k(b, tmp1);
    for (std::size_t i = 0; i < rhs.c.size(); ++i) rhs.c[i] = b.c[i] - tmp1.c[i];

    double rhs2 = dot_h1(rhs, rhs);
    SpectrumField chi(g), r = rhs, p = rhs, mp(g);
    double r2 = rhs2;
    long maxit = 200 + (long)(20.0 * umax / TWO_PI);
    bool converged = false;
    for (long it = 0; it < maxit; ++it) {
        apply_m(p, mp);
        double alpha = r2 / dot_h1(p, mp);
        for (std::size_t i = 0; i < chi.c.size(); ++i) chi.c[i] += alpha * p.c[i];
        for (std::size_t i = 0; i < r.c.size(); ++i) r.c[i] -= alpha * mp.c[i];
        double r2n = dot_h1(r, r);
        // (I−K) has H¹ singular values ≥ 1, so this bounds the original residual too
        if (r2n <= 1e-24 * rhs2) {
            converged = true;
            break;
        }
        double beta = r2n / r2;
        r2 = r2n;
        for (std::size_t i = 0; i < p.c.size(); ++i) p.c[i] = r.c[i] + beta * p.c[i];
    }
    if (converged_out) *converged_out = converged;
    require(converged, "effective_diffusivity_cell: solver failed to converge");
    return 1.0 + sq(hs_norm(chi, 1.0, NormConvention::physical));
}

struct DiffusivityReport {
    std::array<DirectionalEstimate, 2> mc;
    std::array<double, 2> oracle = {0.0, 0.0};
    std::array<bool, 2> oracle_ok = {false, false};
    double D = 0.0;  // min over directions (MC)
    bool d_ge_one = true;
    bool x0_independent = true;
};

inline DiffusivityReport d_min(const VelocityField& u, const SdeConfig& cfg,
                               bool run_oracle = true) {
    DiffusivityReport rep;
    double dmin = std::numeric_limits<double>::infinity();
    for (int c = 0; c < u.grid.dim; ++c) {
        bool indep = true;
        rep.mc[c] = effective_diffusivity_mc(u, c, cfg, c == 0 ? &indep : nullptr);
        if (c == 0) rep.x0_independent = indep;
        if (run_oracle) {
            bool ok = false;
            try {
                rep.oracle[c] = effective_diffusivity_cell(u, c, &ok);
            } catch (const Error&) {
                ok = false;
            }
            rep.oracle_ok[c] = ok;
        }
        dmin = std::min(dmin, rep.mc[c].D);
    }
    rep.D = dmin;
    double ci = std::max(rep.mc[0].ci_half, rep.mc[u.grid.dim - 1].ci_half);
    rep.d_ge_one = rep.D >= 1.0 - ci;
    return rep;
}

}  // namespace dlab
