#pragma once
// Rotation-number (Liouville-type) counterexample construction, in exact
// arithmetic wherever certificates are claimed.
//
// Pieces:
//  * LiouvilleSchedule — a rational rotation number (exact truncation of a
//    fast-approximable irrational) with approximants (q_k, p_k) whose
//    defects |rotation·q_k + p_k| ≤ C/q_k^k are certified in big-rational
//    arithmetic.
//  * HomologyPartial — truncation level K of the bump series
//      Q̃_K = Σ_k [Q̃_{S_k}(· − q_k·rot) − Q̃_{S_k}],   S_k = q_k²,
//      R̃_K = −Σ_k Σ_{l<q_k} Q̃_{S_k}(· − l·rot),
//    stored symbolically as (scale, shift, sign) bump atoms; Q̃_S(x) =
//    bump(S⁶x).  Supports shrink like q^{−12}, so every pointwise value is
//    evaluated from an exact rational argument reduced first, then handed
//    to double precision at O(1) size.
//  * Semi-analytic norms.  Atoms of one level never overlap; atoms of
//    different levels either share a center exactly (the finer support
//    sitting inside the coarser plateau) or are disjoint — both facts are
//    certified exactly per level pair.  Any ∫ (Σ atoms)^p then reduces to
//    per-atom profile moments with an integer "cover count":
//      ∫ R̃^p = Σ_atoms S^{−6} · ∫ [(c_a + θ(y))^p − c_a^p] dy,
//    and ∫ (R̃')² is exactly additive (plateaus have zero derivative).
//    These identities equal the Parseval coefficient sums; no truncation
//    or tail estimate is needed for s ∈ {1, 2}.  The s = 0 norm uses a
//    1/n²-weighted coefficient sum with an explicit tail bound.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "dlab/bump.hpp"
#include "dlab/grid.hpp"
#include "dlab/rational.hpp"

namespace dlab {

// ——— schedules ————————————————————————————————————————————————————————

enum class ScheduleKind { canonical, toy };

struct Approximant {
    BigInt q, p;
    BigRat defect;  // |rotation·q + p|, exact
    BigRat bound;   // C / q^k, exact
};

struct LiouvilleSchedule {
    ScheduleKind kind = ScheduleKind::canonical;
    BigRat rotation;  // exact rational truncation, in (0, 1)
    double C = 1.01;
    int K = 0;
    std::vector<Approximant> approx;  // approx[k-1] is level k
};

inline LiouvilleSchedule build_schedule(ScheduleKind kind, int K, double C = 1.01) {
    require(K >= 1, "build_schedule: K >= 1");
    require(C > 0.0, "build_schedule: C > 0");
    LiouvilleSchedule s;
    s.kind = kind;
    s.C = C;
    s.K = K;
    // exact rational upper bound for C (C is a double, so this is exact)
    BigRat Cr(C);

    std::vector<BigInt> qs;
    if (kind == ScheduleKind::canonical) {
        // rotation = Σ_{n=0}^{K+2} 10^{−n!},  q_k = 10^{k!}
        auto fact = [](int n) {
            unsigned f = 1;
            for (int i = 2; i <= n; ++i) f *= (unsigned)i;
            return f;
        };
        BigRat rot = 0;
        for (int n = 0; n <= K + 2; ++n) rot += BigRat(1, big_pow(10, fact(n)));
        s.rotation = rot;
        for (int k = 1; k <= K; ++k) qs.push_back(big_pow(10, fact(k)));
    } else {
        // toy: q_1 = 8, q_{k+1} = q_k^{k+2};  rotation = Σ_{j=1}^{K+1} q_j^{−(j+1)}.
        // Every modulus q_j^{j+1} divides all later q's, so q_k·rotation is a
        // near-integer with defect ≈ q_k^{−k} — certified below, never assumed.
        std::vector<BigInt> qall;
        BigInt q = 8;
        for (int k = 1; k <= K + 1; ++k) {
            qall.push_back(q);
            q = big_pow(q, (unsigned)(k + 2));
        }
        BigRat rot = 0;
        for (int j = 1; j <= K + 1; ++j) rot += BigRat(1, big_pow(qall[j - 1], (unsigned)(j + 1)));
        s.rotation = rot;
        qs.assign(qall.begin(), qall.begin() + K);
    }
    require(s.rotation > 0 && s.rotation < 1, "build_schedule: rotation in (0,1)");

    BigInt prev_q = 0;
    for (int k = 1; k <= K; ++k) {
        Approximant a;
        a.q = qs[k - 1];
        require(a.q >= k, "build_schedule: q_k >= k violated");
        require(a.q > prev_q, "build_schedule: q_k not strictly increasing");
        prev_q = a.q;
        a.p = -nearest_int(s.rotation * BigRat(a.q));
        BigRat d = s.rotation * BigRat(a.q) + BigRat(a.p);
        a.defect = d < 0 ? -d : d;
        a.bound = Cr / BigRat(big_pow(a.q, (unsigned)k));
        if (a.defect > a.bound)
            throw Error("build_schedule: certificate |rot·q_k + p_k| <= C/q_k^k failed at level " +
                        std::to_string(k));
        s.approx.push_back(std::move(a));
    }
    return s;
}

// ——— scaled bump atoms ————————————————————————————————————————————————

namespace detail {

inline double qtilde_eval_s6(const BigInt& S6, const BigRat& x) {
    BigRat u = frac(x);
    if (u > BigRat(1, 2)) u -= 1;  // reduce to [−1/2, 1/2)
    BigRat arg = BigRat(S6) * u;
    if (arg > BigRat(1, 8) || arg < BigRat(-1, 8)) return 0.0;
    return BumpProfile::instance().eval(to_double(arg));
}

}  // namespace detail

// Q̃_S(x) = θ(S⁶ x), periodized (support radius (1/8)·S^{−6} ≪ 1).
inline double qtilde_eval(const BigInt& q_scale, const BigRat& x) {
    return detail::qtilde_eval_s6(big_pow(q_scale, 6), x);
}

// Fourier coefficient of the periodized Q̃_S: c_n = θ̂(n/S⁶)/S⁶.
inline cplx qtilde_coeff(const BigInt& q_scale, long n) {
    double S6 = to_double(BigRat(big_pow(q_scale, 6)));
    return cplx(BumpProfile::instance().transform((double)n / S6) / S6, 0.0);
}

// ——— assembled partials ———————————————————————————————————————————————

struct HomologyLevel {
    BigInt q;        // q_k: atom count of R̃ at this level
    BigInt S;        // scale parameter q_k² (bump argument scale S⁶ = q^12)
    BigInt S6;       // S⁶, exact
    BigRat width;    // support radius (1/8)·S^{−6}
    BigRat plateau;  // plateau radius (1/16)·S^{−6}
    BigRat min_gap;  // exact lower bound of min_{0<j<q} ||j·rotation||
    // true when every coarser atom is either at a shared center or farther
    // than the two widths combined; false means some atoms of this level may
    // nest inside coarser atoms at non-shared centers (the moment machinery
    // then carries a certified error interval instead of an exact value)
    bool clean_covers = true;
};

struct HomologyPartial {
    LiouvilleSchedule sched;
    int K = 0;
    int sign = -1;  // level identity: R̃(·−rot) − R̃ = −[Q̃_S(·−q·rot) − Q̃_S], see homology_residual
    std::vector<HomologyLevel> levels;
    BigRat total_support;  // exact upper bound on Σ_k m(supp R̃_{q_k})
    int corrupt_level = 0;  // tests: >0 drops one atom of that level from R̃
};

inline HomologyPartial assemble_partials(const LiouvilleSchedule& sched, int K) {
    require(K >= 1 && K <= (int)sched.approx.size(),
            "assemble_partials: schedule needs >= K approximants");
    HomologyPartial hp;
    hp.sched = sched;
    hp.K = K;
    hp.total_support = 0;
    for (int k = 1; k <= K; ++k) {
        HomologyLevel lv;
        lv.q = sched.approx[k - 1].q;
        lv.S = lv.q * lv.q;
        lv.S6 = big_pow(lv.S, 6);
        lv.width = BigRat(1, 8 * lv.S6);
        lv.plateau = BigRat(1, 16 * lv.S6);
        lv.min_gap = min_multiple_distance(sched.rotation, lv.q);
        // within-level disjointness: centers l·rot are ≥ min_gap apart
        require(lv.min_gap > 2 * lv.width,
                "assemble_partials: atoms of one level overlap (schedule too slow)");
        // measure certificate: m(supp R̃_q) ≤ q · 2·width = (1/4)·q^{−11}
        BigRat meas = BigRat(lv.q) * 2 * lv.width;
        require(meas <= BigRat(1, 4) / BigRat(big_pow(lv.q, 11)),
                "assemble_partials: per-level support-measure bound failed");
        hp.total_support += meas;
        hp.levels.push_back(std::move(lv));
    }
    require(hp.total_support < BigRat(1, 2),
            "assemble_partials: total support measure must stay below 1/2");
    // cross-level structure: finer atoms either share a center exactly (and
    // then fit inside the coarser plateau) or are min_gap-separated
    for (int k = 1; k <= K; ++k)
        for (int j = 0; j < k - 1; ++j) {
            require(hp.levels[k - 1].width <= hp.levels[j].plateau,
                    "assemble_partials: finer support does not fit the coarser plateau");
            if (hp.levels[k - 1].min_gap <=
                hp.levels[j].width + hp.levels[k - 1].width)
                hp.levels[k - 1].clean_covers = false;
        }
    return hp;
}

namespace detail {

// value of the level-k R̃ sum at exact rational x, given candidate atom
// indices (exact for enumerable levels; for huge levels the caller supplies
// candidates and the min_gap certificate guarantees completeness)
inline double rtilde_level_eval(const HomologyPartial& hp, int k, const BigRat& x,
                                const std::vector<BigInt>& candidates) {
    const HomologyLevel& lv = hp.levels[k - 1];
    double sum = 0.0;
    const BigInt enum_cap = 4096;
    if (lv.q <= enum_cap) {
        for (BigInt l = 0; l < lv.q; ++l) {
            if (hp.corrupt_level == k && l == 3) continue;
            sum -= qtilde_eval_s6(lv.S6, x - BigRat(l) * hp.sched.rotation);
        }
        return sum;
    }
    for (const BigInt& l : candidates) {
        if (l < 0 || l >= lv.q) continue;
        if (hp.corrupt_level == k && l == 3) continue;
        sum -= qtilde_eval_s6(lv.S6, x - BigRat(l) * hp.sched.rotation);
    }
    return sum;
}

}  // namespace detail

// Q̃_K(x) = Σ_k [Q̃_{S_k}(x − q_k·rot) − Q̃_{S_k}(x)]
inline double qtilde_series_eval(const HomologyPartial& hp, const BigRat& x) {
    double v = 0.0;
    for (const auto& lv : hp.levels)
        v += detail::qtilde_eval_s6(lv.S6, x - BigRat(lv.q) * hp.sched.rotation) -
             detail::qtilde_eval_s6(lv.S6, x);
    return v;
}

struct ResidualReport {
    double max_residual = 0.0;
    std::size_t samples = 0;
};

// max over stratified samples of |R̃_K(x−rot) − R̃_K(x) − sign·Q̃_K(x)|.
// Samples are built around atom centers (all of them for levels with
// q ≤ 64, a deterministic stratified subset for larger levels) plus their
// support endpoints; the min_gap certificates guarantee the candidate atom
// lists passed to the evaluator are complete for every sample.
inline ResidualReport homology_residual(const HomologyPartial& hp, std::size_t M = 1024) {
    require(M >= 1000, "homology_residual: M >= 1000");
    const BigRat& rot = hp.sched.rotation;
    ResidualReport rep;

    // per-level atom index selections
    std::vector<std::vector<BigInt>> sel(hp.K);
    std::size_t per_level = std::max<std::size_t>(8, M / ((std::size_t)hp.K * 11) + 16);
    for (int k = 1; k <= hp.K; ++k) {
        const BigInt& q = hp.levels[k - 1].q;
        std::vector<BigInt>& v = sel[k - 1];
        if (q <= 64) {
            for (BigInt l = 0; l < q; ++l) v.push_back(l);
        } else {
            v = {0, 1, 2, 3, q / 2, q - 2, q - 1};
            std::uint64_t st = 0x9e3779b97f4a7c15ULL;
            for (std::size_t i = 0; v.size() < per_level; ++i) {
                st = st * 6364136223846793005ULL + 1442695040888963407ULL;
                v.push_back(BigInt(st >> 8) % q);
            }
            std::sort(v.begin(), v.end());
            v.erase(std::unique(v.begin(), v.end()), v.end());
        }
    }

    for (int k = 1; k <= hp.K; ++k) {
        const HomologyLevel& lv = hp.levels[k - 1];
        const BigRat& w = lv.width;
        // offsets around each chosen center: interior, edges, just outside
        const std::vector<BigRat> offsets = {BigRat(0),       w / 2,  -w / 2, w * BigRat(15, 16),
                                             -w * BigRat(15, 16), w,      -w,     2 * w,
                                             -2 * w,          w / 16, -w / 16};
        for (const BigInt& l : sel[k - 1]) {
            for (const BigRat& d : offsets) {
                BigRat x = frac(BigRat(l) * rot + d);
                BigRat ad = d < 0 ? -d : d;
                // For huge levels only a window of atoms around l is summed
                // (plus its near-period images l ± q, since the atom at
                // l₀ + q − j can reach x − rot when l₀ is near 0).  For a
                // contiguous window the level sum telescopes, so the computed
                // residual picks up only window-boundary atoms at offsets
                // ±2, ±3 (and q ∓ 2, q ∓ 3) from l; certify those are empty:
                //   dist(j·rot) − defect_k > |d| + width  for j = 2, 3.
                std::vector<BigInt> cand;
                for (int kk = 1; kk <= hp.K; ++kk) {
                    const HomologyLevel& oth = hp.levels[kk - 1];
                    if (oth.q <= 4096) continue;
                    const BigRat& defect = hp.sched.approx[kk - 1].defect;
                    for (int j = 2; j <= 3; ++j) {
                        BigRat dj = dist_to_z(BigRat(j) * rot);
                        require(dj - defect > ad + oth.width + 2 * lv.width,
                                "homology_residual: window-boundary certificate failed");
                    }
                }
                for (int j = -2; j <= 2; ++j) {
                    cand.push_back(l + j);
                    for (int kk = 1; kk <= hp.K; ++kk) {
                        const BigInt& qk = hp.levels[kk - 1].q;
                        if (qk <= 4096) continue;
                        cand.push_back(l + j + qk);
                        cand.push_back(l + j - qk);
                    }
                }
                double r1 = 0.0, r0 = 0.0, qv = qtilde_series_eval(hp, x);
                for (int kk = 1; kk <= hp.K; ++kk) {
                    r1 += detail::rtilde_level_eval(hp, kk, x - rot, cand);
                    r0 += detail::rtilde_level_eval(hp, kk, x, cand);
                }
                double res = std::abs(r1 - r0 - (double)hp.sign * qv);
                rep.max_residual = std::max(rep.max_residual, res);
                ++rep.samples;
            }
        }
    }
    return rep;
}

// ——— semi-analytic norms ———————————————————————————————————————————————

namespace detail {

// Atoms of level k grouped by cover count c = #{j < k : l < q_j}; returns
// (cover, count) pairs with exact counts.
inline std::vector<std::pair<int, BigInt>> cover_groups(const HomologyPartial& hp, int k) {
    std::vector<std::pair<int, BigInt>> g;
    const BigInt& q = hp.levels[k - 1].q;
    // l in [0, q_1) has cover k−1; [q_1, q_2) cover k−2; ...; [q_{k−1}, q) cover 0
    BigInt lo = 0;
    for (int j = 1; j <= k - 1; ++j) {
        BigInt hi = hp.levels[j - 1].q;
        if (hi > q) hi = q;
        if (hi > lo) g.push_back({k - j, hi - lo});
        lo = hi;
    }
    if (q > lo) g.push_back({0, q - lo});
    return g;
}

// ∫ [(c+θ)^p − c^p] dy over the support, p = 1..4, from profile moments
inline double cover_moment(int p, int c, const BumpProfile& b) {
    double M = b.mass(), I2 = b.i2(), I3 = b.i3(), I4 = b.i4();
    double cd = (double)c;
    switch (p) {
        case 1: return M;
        case 2: return 2 * cd * M + I2;
        case 3: return 3 * cd * cd * M + 3 * cd * I2 + I3;
        case 4: return 4 * cd * cd * cd * M + 6 * cd * cd * I2 + 4 * cd * I3 + I4;
    }
    throw Error("cover_moment: p in 1..4");
}

}  // namespace detail

struct RtildeMoments {
    double int_r1 = 0.0;   // ∫R̃ (signed; exact, cover-independent)
    double int_r2 = 0.0;   // ∫R̃²
    double int_r3 = 0.0;   // ∫R̃³ (signed)
    double int_r4 = 0.0;   // ∫R̃⁴
    double int_dr2 = 0.0;  // ∫(R̃')² (exact, cover-independent)
    // certified half-width of the interval around int_r2..int_r4 when some
    // level's cover assignment is ambiguous (bounded by that level's whole
    // mass contribution); zero when all levels are clean
    double err = 0.0;
};

// Exact (up to the profile quadrature) moments of R̃_K via cover counting.
inline RtildeMoments rtilde_moments(const HomologyPartial& hp, int K) {
    require(K >= 1 && K <= hp.K, "rtilde_moments: 1 <= K <= hp.K");
    const BumpProfile& b = BumpProfile::instance();
    RtildeMoments m;
    for (int k = 1; k <= K; ++k) {
        const HomologyLevel& lv = hp.levels[k - 1];
        double s6 = to_double(BigRat(lv.S6));
        double s6inv = 1.0 / s6;
        for (const auto& [c, cnt] : detail::cover_groups(hp, k)) {
            double n = to_double(BigRat(cnt));
            m.int_r1 -= n * s6inv * detail::cover_moment(1, c, b);
            m.int_r2 += n * s6inv * detail::cover_moment(2, c, b);
            m.int_r3 -= n * s6inv * detail::cover_moment(3, c, b);
            m.int_r4 += n * s6inv * detail::cover_moment(4, c, b);
            m.int_dr2 += n * s6 * b.d2();
        }
        if (!lv.clean_covers) {
            // ambiguous covers: the level's whole contribution to ∫R̃^p,
            // p = 2..4, under any cover assignment is bounded by
            // q·S^{−6}·max_c cover_moment(p, c); carry it as an interval
            double qd = to_double(BigRat(lv.q));
            double worst = 0.0;
            for (int p = 2; p <= 4; ++p)
                worst = std::max(worst, detail::cover_moment(p, K - 1, b));
            m.err += qd * s6inv * worst;
        }
    }
    return m;
}

struct SobolevRow {
    int K = 0;
    double h0 = 0.0, h0_tail = 0.0;  // ‖R_K‖_{L²} (coefficient sum) and its tail bound
    double h1 = 0.0;                 // ‖R_K‖_{Ḣ¹} = ‖R̃−mean‖_{L²}/(2π)
    double h2 = 0.0;                 // ‖R_K‖_{Ḣ²} = ‖R̃'‖_{L²}/(4π²)
    double rt_l4_level = 0.0;        // ‖R̃_{q_K}‖_{L⁴} of level K alone
    double l4_bound = 0.0;           // the certified bound C·q_K^{−2}
};

// R̂_K(n) for small n, from the level closed form
//   (R̃_K)̂(n) = −Σ_k θ̂(n/S⁶)/S⁶ · Σ_{l<q} e^{−2πi n l rot}
inline cplx rtilde_hat(const HomologyPartial& hp, long n) {
    cplx v(0.0, 0.0);
    for (const auto& lv : hp.levels) {
        double qc = BumpProfile::instance().transform(
                        (double)n / to_double(BigRat(lv.S6))) /
                    to_double(BigRat(lv.S6));
        // geometric sum over atom phases, exact fractional parts
        BigRat nr = BigRat(n) * hp.sched.rotation;
        double ph = to_double(frac(nr));
        cplx z = std::polar(1.0, -TWO_PI * ph);
        cplx g;
        if (std::abs(z - cplx(1.0, 0.0)) < 1e-9) {
            g = cplx(to_double(BigRat(lv.q)), 0.0);
        } else {
            BigRat nqr = BigRat(n) * BigRat(lv.q) * hp.sched.rotation;
            cplx zq = std::polar(1.0, -TWO_PI * to_double(frac(nqr)));
            g = (cplx(1.0, 0.0) - zq) / (cplx(1.0, 0.0) - z);
        }
        v -= qc * g;
    }
    return v;
}

inline std::vector<SobolevRow> sobolev_growth(const HomologyPartial& hp,
                                              const std::vector<int>& Ks, long n_sum = 4096) {
    std::vector<SobolevRow> rows;
    const BumpProfile& b = BumpProfile::instance();
    for (int K : Ks) {
        RtildeMoments m = rtilde_moments(hp, K);
        SobolevRow r;
        r.K = K;
        double mean = m.int_r1;
        r.h1 = std::sqrt(std::max(0.0, m.int_r2 - mean * mean)) / TWO_PI;
        r.h2 = std::sqrt(m.int_dr2) / (TWO_PI * TWO_PI);
        // s = 0: Σ_{n≠0} |R̃̂(n)|²/(4π²n²) with sup-based tail bound
        HomologyPartial sub = hp;
        sub.K = K;
        sub.levels.assign(hp.levels.begin(), hp.levels.begin() + K);
        double sum = 0.0, suphat = 0.0;
        for (const auto& lv : sub.levels)
            suphat += to_double(BigRat(lv.q)) * b.mass() / to_double(BigRat(lv.S6));
        for (long n = 1; n <= n_sum; ++n)
            sum += 2.0 * std::norm(rtilde_hat(sub, n)) / (TWO_PI * TWO_PI * (double)n * (double)n);
        r.h0_tail = 2.0 * suphat * suphat / (TWO_PI * TWO_PI * (double)n_sum);
        r.h0 = std::sqrt(sum + 0.5 * r.h0_tail);  // midpoint of [sum, sum+tail]
        // level-K L⁴ certificate
        const HomologyLevel& lv = hp.levels[K - 1];
        double qd = to_double(BigRat(lv.q));
        r.rt_l4_level = std::pow(qd * b.i4() / to_double(BigRat(lv.S6)), 0.25);
        r.l4_bound = std::pow(b.i4(), 0.25) / (qd * qd);  // = I₄^{1/4}·q^{−2} ≥ I₄^{1/4}q^{−11/4}
        rows.push_back(r);
    }
    return rows;
}

struct RLambdaRow {
    int K = 0;
    double h1 = 0.0;  // ‖e^{iλR_K}‖_{Ḣ¹}
    double h2 = 0.0;  // ‖e^{iλR_K}‖_{Ḣ²}
};

// Norms of R_λ = e^{iλR_K}: |R_λ| ≡ 1, ∂R_λ = iλ(R̃−mean)R_λ, so
//   ‖R_λ‖²_{Ḣ¹-grad} = λ²·∫(R̃−mean)²,
//   ‖R_λ‖²_{Ḣ²-grad} = λ²·∫(R̃')² + λ⁴·∫(R̃−mean)⁴ (real/imag parts split).
// Reported in the Fourier convention (divide gradient norms by 2π, (2π)²).
inline std::vector<RLambdaRow> r_lambda_diagnostics(const HomologyPartial& hp, double lambda,
                                                    const std::vector<int>& Ks) {
    std::vector<RLambdaRow> rows;
    for (int K : Ks) {
        RtildeMoments m = rtilde_moments(hp, K);
        double mu = m.int_r1;
        double c2 = m.int_r2 - mu * mu;  // ∫(R̃−mean)²
        double c4 = m.int_r4 - 4 * mu * m.int_r3 + 6 * mu * mu * m.int_r2 -
                    3 * mu * mu * mu * mu;  // ∫(R̃−mean)⁴
        RLambdaRow r;
        r.K = K;
        r.h1 = std::sqrt(lambda * lambda * c2) / TWO_PI;
        r.h2 = std::sqrt(lambda * lambda * m.int_dr2 + std::pow(lambda, 4) * std::max(0.0, c4)) /
               (TWO_PI * TWO_PI);
        rows.push_back(r);
    }
    return rows;
}

// ——— the positive transported profile F ————————————————————————————————

namespace detail {

// cumulative ∫_{−∞}^{y} θ, tabulated once
inline double bump_cumulative(double y) {
    static const std::vector<double>& tab = [] {
        static std::vector<double> t;
        const BumpProfile& b = BumpProfile::instance();
        const int n = 8193;
        t.resize(n);
        double lo = -0.125, hi = 0.125, h = (hi - lo) / (n - 1);
        double acc = 0.0;
        t[0] = 0.0;
        for (int i = 1; i < n; ++i) {
            double a = lo + (i - 1) * h, c = lo + i * h;
            acc += (h / 6.0) * (b.eval(a) + 4.0 * b.eval(0.5 * (a + c)) + b.eval(c));
            t[i] = acc;
        }
        return t;
    }();
    const BumpProfile& b = BumpProfile::instance();
    if (y <= -0.125) return 0.0;
    if (y >= 0.125) return tab.back();
    double x = (y + 0.125) / 0.25 * (double)(tab.size() - 1);
    int i = std::min((int)x, (int)tab.size() - 2);
    double u = x - i, h = 0.25 / (double)(tab.size() - 1);
    // Hermite with exact derivative θ
    double y0 = tab[i], y1 = tab[i + 1];
    double d0 = b.eval(-0.125 + i * h) * h, d1 = b.eval(-0.125 + (i + 1) * h) * h;
    double u2 = u * u, u3 = u2 * u;
    return (2 * u3 - 3 * u2 + 1) * y0 + (u3 - 2 * u2 + u) * d0 + (-2 * u3 + 3 * u2) * y1 +
           (u3 - u2) * d1;
}

// mass of the atom Q̃_S(· − c) on the circle arc [0, x), exact-rational setup
inline double atom_arc_mass(const BigInt& S6, const BigRat& c, const BigRat& x) {
    double s6 = to_double(BigRat(S6));
    double total = 0.0;
    for (int img = -1; img <= 1; ++img) {  // images c−1, c, c+1 cover all wraps
        BigRat ci = c + img;
        double hi = to_double(BigRat(S6) * (x - ci));
        double lo = to_double(BigRat(S6) * (BigRat(0) - ci));
        total += (bump_cumulative(hi) - bump_cumulative(lo)) / s6;
    }
    return total;
}

}  // namespace detail

// Q_K(x) = ∫₀ˣ Q̃_K + ∫₀^rot R̃_K, evaluated semi-analytically.  The R̃ arc
// integral counts whole atoms inside (0, rot) exactly (floor counting) and
// handles the two boundary atoms (l = 0 at the arc start, l = 1 whose
// center is exactly the arc end) through the cumulative profile.
inline double q_series_integral(const HomologyPartial& hp, const BigRat& x) {
    const BigRat& rot = hp.sched.rotation;
    const BumpProfile& b = BumpProfile::instance();
    double v = 0.0;
    for (const auto& lv : hp.levels) {
        // ∫₀ˣ of the two Q̃ atoms of this level
        v += detail::atom_arc_mass(lv.S6, frac(BigRat(lv.q) * rot), x);
        v -= detail::atom_arc_mass(lv.S6, BigRat(0), x);
    }
    // ∫₀^rot R̃ (x-independent constant of the homology normalization)
    for (const auto& lv : hp.levels) {
        double s6 = to_double(BigRat(lv.S6));
        // interior whole atoms: l in [2, q−1] with frac(l·rot) < rot;
        // counting identity: #{1 ≤ l ≤ q−1 : frac(l·rot) < rot} = ⌊(q−1)·rot⌋,
        // and l = 1 (center exactly at the arc end) is not among them
        require(lv.min_gap > 2 * lv.width, "q_series_integral: gap certificate");
        BigRat qm1rot = BigRat(lv.q - 1) * rot;
        BigRat fl = qm1rot - frac(qm1rot);  // exact floor of (q−1)·rot
        BigInt interior = numerator(fl);
        // `interior` counts every l in [1, q−1] with frac(l·rot) < rot.  The
        // gap certificate puts all those atoms strictly inside (0, rot) — only
        // l = 0 (center at the arc start) and l = 1 (center exactly at the arc
        // end, hence frac(rot) < rot is false and it is not counted) straddle
        // an endpoint; both get their partial arc mass from the cumulative.
        double whole = to_double(BigRat(interior)) * b.mass() / s6;
        double l0 = detail::atom_arc_mass(lv.S6, BigRat(0), rot);
        double l1 = detail::atom_arc_mass(lv.S6, frac(rot), rot);
        v -= whole + l0 + l1;
    }
    return v;
}

struct FField {
    ScalarField values;   // F on an n×n grid
    double b = 0.0;       // ½·min Q after rescale
    double rescale_c0 = 0.0, rescale_c1 = 1.0;  // Qpos = c0 + c1·Q
    double min_f = 0.0;
    double mean_row0 = 0.0;  // mean of F(·, 0) = mean of Qpos
};

inline FField build_F(const HomologyPartial& hp, const Grid& g) {
    require(g.dim == 2, "build_F: 2-D grid");
    const int n = g.n;
    // sample Q on the x-grid (exact rational arguments)
    std::vector<double> qv(n);
    double qmin = 1e300, qmax = -1e300, qmean = 0.0;
    for (int i = 0; i < n; ++i) {
        qv[i] = q_series_integral(hp, BigRat(i, n));
        qmin = std::min(qmin, qv[i]);
        qmax = std::max(qmax, qv[i]);
        qmean += qv[i];
    }
    qmean /= n;
    double spread = std::max(qmax - qmean, qmean - qmin);
    require(spread > 0.0, "build_F: Q is constant, nothing to transport");
    // affine rescale: positive, unit mean, values in [1/2, 3/2]
    double c1 = 0.5 / spread, c0 = 1.0 - c1 * qmean;
    FField f;
    f.rescale_c0 = c0;
    f.rescale_c1 = c1;
    f.b = 0.5 * (c0 + c1 * qmin);  // ½·min Qpos
    f.values = ScalarField(g);
    const BumpProfile& bp = BumpProfile::instance();
    auto qpos_at = [&](const BigRat& x) { return c0 + c1 * q_series_integral(hp, x); };
    double minf = 1e300;
    for (int iy = 0; iy < n; ++iy) {
        // cutoff ψ(y) = θ(y) reusing the calibrated plateau bump (ψ(0)=1)
        double y = (double)iy / n;
        double yc = y > 0.5 ? y - 1.0 : y;  // centered representative
        double psi = bp.eval(yc);
        for (int ix = 0; ix < n; ++ix) {
            double fv;
            if (psi == 0.0) {
                fv = f.b;
            } else {
                BigRat arg = frac(BigRat(ix, n) - hp.sched.rotation * BigRat(iy, n));
                fv = f.b + psi * (qpos_at(arg) - f.b);
            }
            f.values.at(iy, ix) = fv;
            minf = std::min(minf, fv);
            if (iy == 0) f.mean_row0 += fv;
        }
    }
    f.mean_row0 /= n;
    f.min_f = minf;
    require(minf > 0.0, "build_F: positivity failed");
    return f;
}

}  // namespace dlab
