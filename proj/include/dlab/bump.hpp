#pragma once
// The smooth plateau bump used by the rotation-number construction:
//   θ(t) = 1 on [−1/16, 1/16],  θ(t) = 0 outside [−1/8, 1/8],
// with a C^∞ ramp on each side and |θ'| ≤ 20.
//
// The ramp is the normalized primitive of the flattened kernel
//   w(s) = exp(−ε / (s(1−s))),  s ∈ (0,1),  ε = 1/50,
// whose peak-to-mass ratio is ≈ 1.113, so the slope over the width-1/16
// ramp is ≤ 16·1.113 ≈ 17.8 < 20.  (Polynomial smoothsteps cannot satisfy
// the slope bound in this geometry: their peak ratios start at 1.5.)
//
// Everything downstream evaluates this fixed profile: pointwise values,
// the derivative, the moment integrals ∫θ, ∫θ², ∫θ⁴, ∫θ'², and the real
// Fourier transform θ̂(ξ) = ∫ θ(t) e^{−2πiξt} dt (even, hence real),
// tabulated with cubic interpolation at ≤ 1e−10 error and computed by
// direct panel quadrature outside the table.

#include <array>
#include <cmath>
#include <vector>

#include "dlab/common.hpp"

namespace dlab {

class BumpProfile {
  public:
    static constexpr double plateau = 1.0 / 16.0;  // θ ≡ 1 inside ±plateau
    static constexpr double support = 1.0 / 8.0;   // θ ≡ 0 outside ±support
    static constexpr double slope_bound = 20.0;
    static constexpr double ramp_eps = 0.02;

    static const BumpProfile& instance() {
        static BumpProfile b;
        return b;
    }

    // ramp kernel and its normalized primitive r(s) = ∫₀ˢ w / ∫₀¹ w
    static double kernel(double s) {
        if (s <= 0.0 || s >= 1.0) return 0.0;
        return std::exp(-ramp_eps / (s * (1.0 - s)));
    }
    double ramp(double s) const {
        if (s <= 0.0) return 0.0;
        if (s >= 1.0) return 1.0;
        // cubic Hermite on the tabulated primitive; derivative is the kernel
        double x = s * (double)(ramp_n_ - 1);
        int i = std::min((int)x, ramp_n_ - 2);
        double u = x - i, h = 1.0 / (double)(ramp_n_ - 1);
        double y0 = ramp_tab_[i], y1 = ramp_tab_[i + 1];
        double d0 = kernel((double)i * h) * h / wtot_, d1 = kernel((double)(i + 1) * h) * h / wtot_;
        double u2 = u * u, u3 = u2 * u;
        return (2 * u3 - 3 * u2 + 1) * y0 + (u3 - 2 * u2 + u) * d0 +
               (-2 * u3 + 3 * u2) * y1 + (u3 - u2) * d1;
    }
    double ramp_deriv(double s) const { return kernel(s) / wtot_; }

    // the profile and its derivative
    double eval(double t) const {
        double a = std::abs(t);
        if (a <= plateau) return 1.0;
        if (a >= support) return 0.0;
        return ramp((support - a) / (support - plateau));
    }
    double deriv(double t) const {
        double a = std::abs(t);
        if (a <= plateau || a >= support) return 0.0;
        double d = ramp_deriv((support - a) / (support - plateau)) / (support - plateau);
        return t > 0.0 ? -d : d;
    }

    // moment integrals over the line (support is compact)
    double mass() const { return mass_; }     // ∫θ
    double i2() const { return i2_; }         // ∫θ²
    double i3() const { return i3_; }         // ∫θ³
    double i4() const { return i4_; }         // ∫θ⁴
    double d2() const { return d2_; }         // ∫(θ')²
    double max_slope() const { return max_slope_; }

    // real Fourier transform θ̂(ξ) = 2∫₀^∞ θ(t) cos(2πξt) dt
    double transform(double xi) const {
        double a = std::abs(xi);
        if (a <= table_max_) {
            // Catmull-Rom cubic through the tabulation
            double x = a / table_step_;
            int i = (int)x;
            if (i > table_n_ - 3) i = table_n_ - 3;
            if (i < 1) return transform_quad(a);  // near 0: direct (cheap, exact symmetry)
            double u = x - i;
            double ym = tf_tab_[i - 1], y0 = tf_tab_[i], y1 = tf_tab_[i + 1], y2 = tf_tab_[i + 2];
            double a0 = -0.5 * ym + 1.5 * y0 - 1.5 * y1 + 0.5 * y2;
            double a1 = ym - 2.5 * y0 + 2.0 * y1 - 0.5 * y2;
            double a2 = -0.5 * ym + 0.5 * y1;
            return ((a0 * u + a1) * u + a2) * u + y0;
        }
        return transform_quad(a);
    }

    // direct quadrature of the transform (oracle for the tabulation)
    double transform_quad(double xi) const {
        double a = std::abs(xi);
        // plateau part: ∫_{-1/16}^{1/16} cos(2πξt) dt = sin(2πξ/16)/(πξ)
        double plateau_part =
            a < 1e-12 ? 2.0 * plateau : std::sin(TWO_PI * a * plateau) / (M_PI * a);
        // ramp part: 2 ∫_{1/16}^{1/8} r((1/8−t)·16) cos(2πξt) dt, Gauss-Legendre panels
        double lo = plateau, hi = support;
        int panels = 16 + (int)(a * (hi - lo) * 4.0);
        double sum = 0.0, hw = (hi - lo) / panels;
        for (int p = 0; p < panels; ++p) {
            double c = lo + (p + 0.5) * hw;
            for (int q = 0; q < 5; ++q) {
                double t = c + 0.5 * hw * gl_x_[q];
                sum += gl_w_[q] * eval(t) * std::cos(TWO_PI * a * t);
            }
        }
        return plateau_part + 2.0 * sum * 0.5 * hw;
    }

  private:
    BumpProfile() {
        // primitive of the kernel by composite Simpson on a fine grid
        ramp_tab_.resize(ramp_n_);
        double h = 1.0 / (double)(ramp_n_ - 1);
        double acc = 0.0;
        ramp_tab_[0] = 0.0;
        for (int i = 1; i < ramp_n_; ++i) {
            double a = (double)(i - 1) * h, b = (double)i * h;
            acc += (h / 6.0) * (kernel(a) + 4.0 * kernel(0.5 * (a + b)) + kernel(b));
            ramp_tab_[i] = acc;
        }
        wtot_ = acc;
        for (auto& v : ramp_tab_) v /= wtot_;

        // moment integrals: plateau exactly, ramps by Simpson on the s-grid
        double ramp_m = 0.0, ramp_2 = 0.0, ramp_3 = 0.0, ramp_4 = 0.0, ramp_d2 = 0.0, ms = 0.0;
        for (int i = 0; i < ramp_n_ - 1; ++i) {
            double a = (double)i * h, b = (double)(i + 1) * h, m = 0.5 * (a + b);
            auto acc3 = [&](auto&& f) {
                return (h / 6.0) * (f(a) + 4.0 * f(m) + f(b));
            };
            ramp_m += acc3([&](double s) { return ramp(s); });
            ramp_2 += acc3([&](double s) { double v = ramp(s); return v * v; });
            ramp_3 += acc3([&](double s) { double v = ramp(s); return v * v * v; });
            ramp_4 += acc3([&](double s) { double v = ramp(s); return v * v * v * v; });
            ramp_d2 += acc3([&](double s) { double v = ramp_deriv(s); return v * v; });
            ms = std::max(ms, ramp_deriv(m));
        }
        double w = support - plateau;  // ramp width in t
        mass_ = 2.0 * plateau + 2.0 * w * ramp_m;
        i2_ = 2.0 * plateau + 2.0 * w * ramp_2;
        i3_ = 2.0 * plateau + 2.0 * w * ramp_3;
        i4_ = 2.0 * plateau + 2.0 * w * ramp_4;
        d2_ = 2.0 * ramp_d2 / w;  // (r'(s)/w)² integrated dt = ∫r'²/w
        max_slope_ = ms / w;

        // transform tabulation
        tf_tab_.resize(table_n_);
        for (int i = 0; i < table_n_; ++i) tf_tab_[i] = transform_quad((double)i * table_step_);
    }

    static constexpr int ramp_n_ = 4097;
    static constexpr int table_n_ = 16385;
    static constexpr double table_step_ = 1.0 / 64.0;
    static constexpr double table_max_ = (double)(table_n_ - 1) / 64.0;
    // 5-point Gauss-Legendre on [−1, 1]
    static constexpr std::array<double, 5> gl_x_ = {-0.9061798459386640, -0.5384693101056831,
                                                    0.0, 0.5384693101056831, 0.9061798459386640};
    static constexpr std::array<double, 5> gl_w_ = {0.2369268850561891, 0.4786286704993665,
                                                    0.5688888888888889, 0.4786286704993665,
                                                    0.2369268850561891};
    std::vector<double> ramp_tab_, tf_tab_;
    double wtot_ = 0.0, mass_ = 0.0, i2_ = 0.0, i3_ = 0.0, i4_ = 0.0, d2_ = 0.0,
           max_slope_ = 0.0;
};

}  // namespace dlab
