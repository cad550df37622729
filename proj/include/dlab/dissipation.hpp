#pragma once
// Dissipation times of advection-(hyper)diffusion semigroups on the torus.
//
// The dissipation time τ*_α(u, γ) is the first t at which the mean-zero
// solution operator S_t of  θ_t + u·∇θ = −γ(−Δ)^α θ  satisfies ‖S_t‖ ≤ 1/2
// on L²₀.  Norms are largest singular values, estimated by power iteration
// on S_t*S_t; the adjoint semigroup is the same equation with u ↦ −u
// (u is divergence-free, so advection is skew-adjoint).
//
// Two scan engines share the same geometric time ladder (64 points per
// decade by default):
//  * full:       a converged multi-start power iteration at every ladder
//                point, then bisection — used for pure diffusion and other
//                cheap operators where each norm evaluation is affordable.
//  * economized: one forward pass from a (possibly warm-started) unit
//                vector records r(t) = ‖S_t v‖ at every ladder time it
//                passes; one adjoint pass from the normalized final vector
//                records a(t) = ‖S*_t w‖ the same way.  Every r and a is a
//                certified lower bound of ‖S_t‖, and the pair (r, a) at the
//                pass horizon is two successive power-iteration estimates,
//                so their relative gap certifies convergence there.  Cycles
//                repeat (each warm-starting from the last adjoint vector)
//                until the horizon pair has converged below 1/2.  This
//                costs ~2 pass-times per cycle instead of 2 per ladder
//                point, which is what makes large-amplitude sweeps fit in
//                a sane budget.

#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "dlab/evolve.hpp"
#include "dlab/flows.hpp"
#include "dlab/rng.hpp"

namespace dlab {

// Band-limited random mean-zero unit vector (deterministic in seed).
inline SpectrumField random_mean_zero(const Grid& g, std::uint64_t seed, int kmax = 0) {
    if (kmax <= 0) kmax = std::max(2, g.n / 6);
    CounterRng rng{seed};
    ScalarField noise(g);
    for (std::size_t i = 0; i < g.npoints(); ++i)
        noise.v[i] = rng.normal_pair(0x6e6f697365ULL, i).first;
    SpectrumField v = to_spectral(noise);
    for_each_mode(g, [&](int k1, int k2, std::size_t i, double) {
        if (std::abs(k1) > kmax || std::abs(k2) > kmax) v.c[i] = cplx(0.0);
    });
    v.c[0] = cplx(0.0);
    double nrm = hs_norm(v, 0.0, NormConvention::physical);
    require(nrm > 0.0, "random_mean_zero: degenerate start vector");
    for (auto& z : v.c) z /= nrm;
    return v;
}

namespace detail {

inline VelocityField negated(const VelocityField& u) {
    VelocityField nu = u;
    for (auto& c : nu.comp)
        for (auto& x : c.v) x = -x;
    return nu;
}

inline double sf_norm(const SpectrumField& v) {
    return hs_norm(v, 0.0, NormConvention::physical);
}

inline void sf_scale(SpectrumField& v, double s) {
    for (auto& z : v.c) z *= s;
}

}  // namespace detail

// Forward/adjoint semigroup passes sharing one pair of steppers; owns the
// negated velocity copy the adjoint stepper points into.
class SemigroupPair {
  public:
    SemigroupPair(const VelocityField* u, const Grid& g, double alpha, double gamma)
        : has_u_(u != nullptr && u->max_abs() > 0.0),
          nu_(has_u_ ? std::make_unique<VelocityField>(detail::negated(*u)) : nullptr),
          fwd_(g, has_u_ ? u : nullptr, alpha, gamma),
          adj_(g, nu_.get(), alpha, gamma) {}

    bool has_advection() const { return has_u_; }
    double max_speed() const { return fwd_.max_speed(); }

    // Advance v by `steps` steps of size dt; rec(k) runs after step k (1-based).
    template <class F>
    void advance(SpectrumField& v, long steps, double dt, bool adjoint, F&& rec) {
        AdvectionStepper& st = adjoint ? adj_ : fwd_;
        for (long k = 1; k <= steps; ++k) {
            st.step(v, dt);
            rec(k);
        }
    }
    void advance(SpectrumField& v, long steps, double dt, bool adjoint) {
        advance(v, steps, dt, adjoint, [](long) {});
    }

  private:
    bool has_u_;
    std::unique_ptr<VelocityField> nu_;
    AdvectionStepper fwd_, adj_;
};

struct NormOptions {
    int starts = 3;          // independent random starts (best lower bound wins)
    int max_iters = 60;      // power iterations per start
    double rel_tol = 1e-4;   // successive-Rayleigh convergence threshold
    double cfl = 1.0;        // advective step bound: dt = cfl·h/max|u|
    double dt = 0.0;         // 0 → from cfl (u = 0: one exact step)
    std::uint64_t seed = 20260826ULL;
};

struct NormEstimate {
    double value = 0.0;      // best converged lower bound of ‖S_t‖
    int iterations = 0;      // total power iterations across starts
    bool converged = false;
    long steps = 0;          // total time steps integrated
    std::vector<double> history;  // Rayleigh sequence of the winning start
};

namespace detail {

inline std::pair<double, long> norm_dt(const SemigroupPair& sg, const Grid& g, double t,
                                       const NormOptions& opt) {
    double dt;
    if (!sg.has_advection()) {
        dt = opt.dt > 0.0 ? opt.dt : t;  // integrating factor is exact for u = 0
    } else {
        dt = opt.dt > 0.0 ? opt.dt : opt.cfl * g.h() / sg.max_speed();
    }
    long steps = std::max(1L, (long)std::ceil(t / dt - 1e-9));
    return {t / (double)steps, steps};
}

}  // namespace detail

// Largest singular value of S_t on mean-zero L², by power iteration.
inline NormEstimate operator_norm(const VelocityField* u, const Grid& g, double gamma,
                                  double alpha, double t, NormOptions opt = {}) {
    require(t >= 0.0, "operator_norm: t >= 0");
    NormEstimate best;
    if (t == 0.0) {  // identity operator
        best.value = 1.0;
        best.converged = true;
        return best;
    }
    SemigroupPair sg(u, g, alpha, gamma);
    auto [dt, steps] = detail::norm_dt(sg, g, t, opt);
    int starts = sg.has_advection() ? opt.starts : 1;  // u = 0: diagonal, one start
    // diagonal case: iterations are nearly free, so converge much tighter
    double rel_tol = sg.has_advection() ? opt.rel_tol : std::min(opt.rel_tol, 1e-8);
    int max_iters = sg.has_advection() ? opt.max_iters : std::max(opt.max_iters, 400);
    for (int s = 0; s < starts; ++s) {
        SpectrumField v = random_mean_zero(g, opt.seed + 0x9e37ULL * (std::uint64_t)s);
        std::vector<double> hist;
        double sigma = 0.0;
        bool conv = false;
        long used = 0;
        for (int it = 0; it < max_iters; ++it) {
            sg.advance(v, steps, dt, false);
            double s1 = detail::sf_norm(v);
            require(s1 > 0.0, "operator_norm: semigroup annihilated the iterate");
            detail::sf_scale(v, 1.0 / s1);
            sg.advance(v, steps, dt, true);
            double s2 = detail::sf_norm(v);
            detail::sf_scale(v, 1.0 / s2);
            used += 2 * steps;
            // Rayleigh sequence is monotone non-decreasing for S*S iteration
            require(s2 >= s1 * (1.0 - 1e-12), "operator_norm: Rayleigh sequence decreased");
            require(hist.empty() || s1 >= hist.back() * (1.0 - 1e-12),
                    "operator_norm: Rayleigh sequence decreased across iterations");
            hist.push_back(s1);
            hist.push_back(s2);
            if ((s2 - s1) / s2 < rel_tol) {
                sigma = s2;
                conv = true;
                break;
            }
            sigma = s2;
        }
        best.iterations += (int)hist.size() / 2;
        best.steps += used;
        if (sigma > best.value) {
            best.value = sigma;
            best.converged = conv;
            best.history = std::move(hist);
        }
    }
    return best;
}

struct NormSample {
    double t = 0.0;
    double norm = 0.0;       // best available estimate (lower bound)
    bool converged = false;  // true when a successive pair matched at this t
};

struct DissipationOptions {
    double tol = 0.04;       // requested relative bracket width
    int per_decade = 64;     // geometric ladder resolution
    double cfl = 1.0;        // advective step bound
    double dt = 0.0;         // override time step
    std::uint64_t seed = 20260826ULL;
    int starts = 3;          // full engine: power-iteration starts
    bool economize = false;  // pass-recording engine instead of per-point norms
    double tau_hint = 0.0;   // expected crossing (plans economized horizons)
    std::shared_ptr<const SpectrumField> warm;  // start vector (economized)
    double t0 = 0.0;         // ladder origin; 0 → automatic
    int max_cycles = 8;      // economized forward/adjoint cycle budget
    double pair_tol = 1e-3;  // economized horizon-pair convergence
};

struct DissipationReport {
    double alpha = 1.0, gamma = 0.0;
    double tau = std::numeric_limits<double>::quiet_NaN();
    double t_lo = 0.0, t_hi = 0.0;   // ‖S‖ > 1/2 at t_lo (lower bound), ≤ 1/2 at t_hi (converged)
    std::vector<NormSample> samples;
    long power_iterations = 0;       // semigroup pass pairs
    long total_steps = 0;
    int grid_n = 0;
    double dt = 0.0;
    std::uint64_t seed = 0;
    double tol = 0.0;
    int per_decade = 0;
    bool diverged = false;           // no crossing before 10·(pure-diffusion τ)
    std::string method;              // "full" or "economized"
    std::shared_ptr<SpectrumField> top;  // converged slow vector (warm start for a neighbor)
};

inline double pure_diffusion_tau(double gamma, double alpha) {
    require(gamma > 0.0, "pure_diffusion_tau: gamma > 0");
    return std::log(2.0) / (gamma * std::pow(TWO_PI * TWO_PI, alpha));
}

namespace detail {

// Geometric ladder realized as integer step counts (strictly increasing).
struct Ladder {
    std::vector<long> steps;
    std::vector<double> times;
    double dt = 0.0;

    void build(double t0, double t_max, double ratio, double dt_) {
        dt = dt_;
        steps.clear();
        times.clear();
        long prev = 0;
        for (double t = t0; t <= t_max * (1.0 + 1e-12); t *= ratio) {
            long s = std::max(prev + 1, (long)std::llround(t / dt));
            steps.push_back(s);
            times.push_back((double)s * dt);
            prev = s;
        }
    }
};

inline double interp_crossing(double t1, double v1, double t2, double v2) {
    // log-linear interpolation of the norm curve through 1/2
    if (v1 <= 0.5) return t1;
    if (v2 >= 0.5) return t2;
    double w = (std::log(v1) - std::log(0.5)) / (std::log(v1) - std::log(v2));
    return t1 * std::pow(t2 / t1, w);
}

}  // namespace detail

// Full engine: converged norm at each ladder point, then bisection.
inline DissipationReport dissipation_time_full(const VelocityField* u, const Grid& g,
                                               double gamma, double alpha,
                                               const DissipationOptions& opt) {
    DissipationReport rep;
    rep.alpha = alpha;
    rep.gamma = gamma;
    rep.grid_n = g.n;
    rep.seed = opt.seed;
    rep.tol = opt.tol;
    rep.per_decade = opt.per_decade;
    rep.method = "full";

    double tau0 = pure_diffusion_tau(gamma, alpha);
    bool has_u = u != nullptr && u->max_abs() > 0.0;
    double t0 = opt.t0 > 0.0 ? opt.t0 : (has_u ? tau0 / 256.0 : tau0 / 8.0);
    double ratio = std::pow(10.0, 1.0 / opt.per_decade);
    double cap = 10.0 * tau0;

    NormOptions nopt;
    nopt.starts = opt.starts;
    nopt.cfl = opt.cfl;
    nopt.dt = opt.dt;
    nopt.seed = opt.seed;

    auto norm_at = [&](double t) {
        NormEstimate e = operator_norm(u, g, gamma, alpha, t, nopt);
        rep.power_iterations += e.iterations;
        rep.total_steps += e.steps;
        rep.samples.push_back({t, e.value, e.converged});
        return e.value;
    };

    // ensure the ladder starts above the crossing
    while (norm_at(t0) <= 0.5) {
        rep.samples.pop_back();
        t0 /= 4.0;
        require(t0 > 1e-12 * tau0, "dissipation_time: crossing below resolvable times");
    }
    double t_lo = t0, v_lo = rep.samples.back().norm;
    double t_hi = 0.0, v_hi = 0.0;
    for (double t = t0 * ratio;; t *= ratio) {
        if (t > cap) {
            rep.diverged = true;
            return rep;
        }
        double v = norm_at(t);
        if (v <= 0.5) {
            t_hi = t;
            v_hi = v;
            break;
        }
        t_lo = t;
        v_lo = v;
    }
    while (t_hi - t_lo > opt.tol * t_lo) {
        double mid = std::sqrt(t_lo * t_hi);
        double v = norm_at(mid);
        if (v <= 0.5) {
            t_hi = mid;
            v_hi = v;
        } else {
            t_lo = mid;
            v_lo = v;
        }
    }
    rep.t_lo = t_lo;
    rep.t_hi = t_hi;
    rep.tau = detail::interp_crossing(t_lo, v_lo, t_hi, v_hi);
    rep.dt = opt.dt;
    return rep;
}

// Economized engine: forward/adjoint pass cycles with in-run ladder recording.
inline DissipationReport dissipation_time_economized(const VelocityField* u, const Grid& g,
                                                     double gamma, double alpha,
                                                     const DissipationOptions& opt) {
    require(u != nullptr && u->max_abs() > 0.0,
            "dissipation_time_economized: needs a nonzero flow (use the full engine for u = 0)");
    DissipationReport rep;
    rep.alpha = alpha;
    rep.gamma = gamma;
    rep.grid_n = g.n;
    rep.seed = opt.seed;
    rep.per_decade = opt.per_decade;
    rep.method = "economized";

    SemigroupPair sg(u, g, alpha, gamma);
    double dt = opt.dt > 0.0 ? opt.dt : opt.cfl * g.h() / sg.max_speed();
    rep.dt = dt;

    double tau0 = pure_diffusion_tau(gamma, alpha);
    double cap = 10.0 * tau0;
    double ratio = std::pow(10.0, 1.0 / opt.per_decade);
    // bracket resolution is limited by the ladder plus certification margin
    double ladder_tol = std::pow(ratio, 4.0) - 1.0;
    rep.tol = std::max(opt.tol, ladder_tol);
    double t0 = opt.t0 > 0.0 ? opt.t0 : std::max(4.0 * dt, (opt.tau_hint > 0.0 ? opt.tau_hint : tau0) / 300.0);

    detail::Ladder lad;
    lad.build(t0, cap, ratio, dt);
    std::size_t nlad = lad.steps.size();
    std::vector<double> lb(nlad, -1.0);  // best lower bound per ladder point

    SpectrumField v = opt.warm ? *opt.warm : random_mean_zero(g, opt.seed);
    {
        double nv = detail::sf_norm(v);
        require(nv > 0.0, "dissipation_time_economized: zero start vector");
        detail::sf_scale(v, 1.0 / nv);
    }
    bool warm = (bool)opt.warm;

    auto first_crossing = [&](void) -> std::ptrdiff_t {
        for (std::size_t j = 0; j < nlad; ++j) {
            if (lb[j] < 0.0) return -1;  // unexplored before any crossing
            if (lb[j] <= 0.5) return (std::ptrdiff_t)j;
        }
        return -1;
    };

    std::size_t horizon_j = nlad;  // ladder index the current cycle runs to (exclusive)
    if (opt.tau_hint > 0.0) {
        for (std::size_t j = 0; j < nlad; ++j)
            if (lad.times[j] >= opt.tau_hint * std::pow(ratio, 2.0)) {
                horizon_j = j + 1;
                break;
            }
    }

    for (int cycle = 0; cycle < opt.max_cycles; ++cycle) {
        // ---- forward pass: record r(t) at ladder steps, stop adaptively ----
        double stop_frac = (warm || cycle > 0) ? 0.42 : 0.22;
        std::vector<double> r(nlad, -1.0);
        std::size_t jmax = 0;  // last ladder index reached (inclusive)
        {
            std::size_t j = 0;
            long k = 0;
            std::ptrdiff_t jcross = -1;
            bool stop = false;
            while (!stop && j < nlad) {
                long target = lad.steps[j];
                sg.advance(v, target - k, dt, false);
                k = target;
                double rv = detail::sf_norm(v);
                require(std::isfinite(rv), "dissipation_time: forward pass lost finiteness");
                r[j] = rv;
                lb[j] = std::max(lb[j], rv);
                jmax = j;
                if (jcross < 0 && rv <= 0.5) jcross = (std::ptrdiff_t)j;
                bool reached_hint = horizon_j == nlad || j + 1 >= horizon_j;
                bool past_cross = jcross >= 0 && j >= (std::size_t)jcross + 2;
                if (past_cross || (jcross < 0 && rv < stop_frac && reached_hint) || rv < 0.08)
                    stop = true;
                ++j;
            }
            rep.total_steps += k;
            if (jmax + 1 == nlad && r[jmax] > 0.5) {
                rep.diverged = true;  // no crossing before the cap
                break;
            }
        }

        // ---- adjoint pass from the normalized final vector ----
        double r_end = r[jmax];
        detail::sf_scale(v, 1.0 / r_end);
        std::vector<double> a(jmax + 1, -1.0);
        {
            std::size_t j = 0;
            long k = 0;
            while (j <= jmax) {
                long target = lad.steps[j];
                sg.advance(v, target - k, dt, true);
                k = target;
                double av = detail::sf_norm(v);
                require(std::isfinite(av), "dissipation_time: adjoint pass lost finiteness");
                a[j] = av;
                lb[j] = std::max(lb[j], av);
                ++j;
            }
            rep.total_steps += k;
        }
        rep.power_iterations += 1;
        double a_end = a[jmax];
        detail::sf_scale(v, 1.0 / a_end);  // v is now the next warm start
        warm = true;

        // ---- convergence/crossing bookkeeping ----
        double gap = (a_end - r_end) / a_end;
        require(gap > -1e-12, "dissipation_time: Rayleigh pair decreased");
        std::ptrdiff_t jc = first_crossing();
        if (std::getenv("DLAB_DISS_DEBUG"))
            std::fprintf(stderr,
                         "  [diss] cycle=%d jmax=%zu t_end=%.4f r_end=%.5f a_end=%.5f gap=%.2e jc=%td\n",
                         cycle, jmax, lad.times[jmax], r_end, a_end, gap, jc);
        // Converged when the successive pair matches, or when the remaining
        // geometric drift (gap ratio ≈ 0.7 per cycle ⇒ limit ≤ a·(1 + 3·gap))
        // cannot lift the horizon estimate back above 1/2.
        bool pair_ok = gap < opt.pair_tol ||
                       (gap < 0.03 && a_end * (1.0 + 3.0 * gap) <= 0.5);
        if (pair_ok && jc >= 0 && a_end <= 0.5) {
            // certified: lb > 1/2 up to jc−1 (lower bounds), converged ≤ 1/2 at jmax
            rep.t_lo = jc > 0 ? lad.times[(std::size_t)jc - 1] : 0.0;
            rep.t_hi = lad.times[jmax];
            double v_lo = jc > 0 ? lb[(std::size_t)jc - 1] : 1.0;
            rep.tau = detail::interp_crossing(rep.t_lo, v_lo, lad.times[(std::size_t)jc],
                                              lb[(std::size_t)jc]);
            if (rep.tau > 0.0)
                rep.tol = std::max(rep.tol, (rep.t_hi - rep.t_lo) / rep.tau);  // achieved width
            rep.samples.clear();
            for (std::size_t j = 0; j <= jmax; ++j)
                if (lb[j] >= 0.0)
                    rep.samples.push_back({lad.times[j], lb[j], pair_ok && j == jmax});
            rep.top = std::make_shared<SpectrumField>(v);
            return rep;
        }
        // not certified yet: set the horizon for the next cycle from the
        // tentative crossing (or extend if none was seen)
        if (jc >= 0)
            horizon_j = std::min(nlad, (std::size_t)jc + 3);
        else
            horizon_j = nlad;
    }
    if (!rep.diverged) {
        // cycle budget exhausted: report the best lower-bound picture, no bracket
        for (std::size_t j = 0; j < nlad; ++j)
            if (lb[j] >= 0.0) rep.samples.push_back({lad.times[j], lb[j], false});
        rep.top = std::make_shared<SpectrumField>(v);
    }
    return rep;
}

inline DissipationReport dissipation_time(const VelocityField* u, const Grid& g, double gamma,
                                          double alpha, const DissipationOptions& opt = {}) {
    require(opt.tol > 0.0 && opt.tol < 0.5, "dissipation_time: tol in (0, 0.5)");
    bool has_u = u != nullptr && u->max_abs() > 0.0;
    if (opt.economize && has_u) return dissipation_time_economized(u, g, gamma, alpha, opt);
    return dissipation_time_full(u, g, gamma, alpha, opt);
}

// ——— enhancement sweeps ————————————————————————————————————————————————

struct SweepCell {
    int m = 0;
    double A = 0.0;
    double alpha = 1.0;
    DissipationReport rep;
    bool failed = false;
    std::string error;
};

struct SweepTable {
    double gamma = 0.0;
    int grid_n = 0;
    std::vector<SweepCell> cells;

    const SweepCell* find(int m, double A, double alpha) const {
        for (const auto& c : cells)
            if (c.m == m && c.A == A && c.alpha == alpha) return &c;
        return nullptr;
    }
    // τ non-increasing along the A-axis at fixed (m, α); cells appear in sweep order
    // Non-increase of the measured dissipation time along ascending A.  Each
    // measurement is a certified bracket [t_lo, t_hi] with recorded relative
    // tolerance; "non-increasing" therefore means (a) no certified increase —
    // the next bracket's lower end does not exceed the previous bracket's
    // upper end — and (b) point estimates do not rise beyond the larger of
    // the two recorded tolerances (plus any caller slack).  Near saturation
    // the true τ differences fall below the measurement resolution, and this
    // is the strongest comparison the interval measurements support.
    bool tau_nonincreasing(int m, double alpha, double slack = 0.0) const {
        const SweepCell* prev = nullptr;
        for (const auto& c : cells) {
            if (c.m != m || c.alpha != alpha || c.failed) continue;
            if (prev) {
                double s = std::max(slack, std::max(prev->rep.tol, c.rep.tol));
                if (c.rep.tau > prev->rep.tau * (1.0 + s)) return false;
                if (c.rep.t_lo > prev->rep.t_hi * (1.0 + slack)) return false;
            }
            prev = &c;
        }
        return true;
    }
};

// Exponent of the paper's cited rescaling example: A(m) = m^(2 + 15/113).
inline double remark_diagonal_amplitude(int m) { return std::pow((double)m, 2.0 + 15.0 / 113.0); }

inline SweepTable enhancement_sweep(const std::vector<int>& ms, const std::vector<double>& As,
                                    const std::vector<double>& alphas, double gamma,
                                    const Grid& g, DissipationOptions base = {}) {
    SweepTable table;
    table.gamma = gamma;
    table.grid_n = g.n;
    for (double alpha : alphas) {
        for (int m : ms) {
            std::shared_ptr<const SpectrumField> warm;
            double hint = 0.0;
            for (double A : As) {  // ascending A expected: warm chain down the column
                SweepCell cell;
                cell.m = m;
                cell.A = A;
                cell.alpha = alpha;
                try {
                    DissipationOptions opt = base;
                    opt.warm = warm;
                    opt.tau_hint = hint;
                    if (A == 0.0) {
                        opt.economize = false;
                        cell.rep = dissipation_time(nullptr, g, gamma, alpha, opt);
                    } else {
                        opt.economize = true;
                        VelocityField u = cellular(m, A, g);
                        cell.rep = dissipation_time(&u, g, gamma, alpha, opt);
                        if (cell.rep.top) warm = cell.rep.top;
                        if (std::isfinite(cell.rep.tau)) hint = cell.rep.tau;
                    }
                    if (cell.rep.diverged) {
                        cell.failed = true;
                        cell.error = "no crossing before the pure-diffusion cap";
                    }
                } catch (const std::exception& e) {
                    cell.failed = true;
                    cell.error = e.what();
                }
                table.cells.push_back(std::move(cell));
            }
        }
    }
    return table;
}

// ——— τ₂ vs τ₁ relation ————————————————————————————————————————————————

struct TauRelation {
    double tau1 = 0.0, tau2 = 0.0;
    double u_c2 = 0.0;   // ‖u‖_{C²} (sup norms of derivatives through order 2)
    double c_min = 0.0;  // smallest C with τ₂ ≤ C·τ₁·(1 + ‖u‖_{C²}·τ₁)
};

inline TauRelation tau_relation_check(const VelocityField* u, const Grid& g, double gamma,
                                      DissipationOptions opt = {}) {
    TauRelation rel;
    bool has_u = u != nullptr && u->max_abs() > 0.0;
    rel.u_c2 = has_u ? c2_norm(*u) : 0.0;
    opt.economize = has_u;
    DissipationReport r1 = dissipation_time(u, g, gamma, 1.0, opt);
    opt.tau_hint = 0.0;
    DissipationReport r2 = dissipation_time(u, g, gamma, 2.0, opt);
    require(!r1.diverged && !r2.diverged, "tau_relation_check: dissipation time diverged");
    rel.tau1 = r1.tau;
    rel.tau2 = r2.tau;
    rel.c_min = rel.tau2 / (rel.tau1 * (1.0 + rel.u_c2 * rel.tau1));
    return rel;
}

}  // namespace dlab
