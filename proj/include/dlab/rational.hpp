#pragma once
// Exact big-rational arithmetic used by the rotation-number construction.
// All schedule certificates are proven in this arithmetic; doubles appear
// only after an exact quantity has been reduced to O(1) size.

#include <boost/multiprecision/cpp_int.hpp>

#include <string>
#include <vector>

#include "dlab/common.hpp"

namespace dlab {

using BigInt = boost::multiprecision::cpp_int;
using BigRat = boost::multiprecision::cpp_rational;

inline BigInt big_pow(const BigInt& b, unsigned e) {
    BigInt r = 1, x = b;
    for (unsigned k = e; k > 0; k >>= 1) {
        if (k & 1) r *= x;
        x *= x;
    }
    return r;
}

// fractional part in [0, 1)
inline BigRat frac(const BigRat& x) {
    BigInt fl = numerator(x) / denominator(x);
    if (x < 0 && fl * denominator(x) != numerator(x)) fl -= 1;
    return x - BigRat(fl);
}

// distance to the nearest integer, in [0, 1/2]
inline BigRat dist_to_z(const BigRat& x) {
    BigRat f = frac(x);
    return f <= BigRat(1, 2) ? f : BigRat(1) - f;
}

// nearest integer (ties toward even are irrelevant here; ties round down)
inline BigInt nearest_int(const BigRat& x) {
    BigRat f = frac(x);
    BigRat fr = x - f;  // exact floor as a rational with denominator 1
    BigInt fl = numerator(fr);
    return f <= BigRat(1, 2) ? fl : fl + 1;
}

inline double to_double(const BigRat& x) { return x.convert_to<double>(); }

inline std::string to_string(const BigRat& x) {
    return numerator(x).str() + "/" + denominator(x).str();
}

// Continued-fraction convergent denominators of a rational in (0,1), in
// increasing order (1 = q_0, ...).  Best-approximation property: for any
// 0 < j < q_{m+1}, dist_to_z(j·x) >= dist_to_z(q_m·x).
inline std::vector<BigInt> convergent_denominators(const BigRat& x) {
    require(x > 0 && x < 1, "convergent_denominators: x in (0,1)");
    BigInt p = numerator(x), q = denominator(x);
    // continued fraction of p/q by the Euclidean algorithm
    std::vector<BigInt> dens;
    BigInt qm1 = 0, qm = 1;  // q_{-1}, q_0 seeds for denominators
    BigInt a = q, b = p;     // x = p/q < 1 so first partial quotient comes from q/p
    while (b != 0) {
        BigInt coef = a / b;
        BigInt r = a - coef * b;
        BigInt qn = coef * qm + qm1;
        qm1 = qm;
        qm = qn;
        dens.push_back(qn);
        a = b;
        b = r;
    }
    return dens;
}

// Exact min over 0 < j < limit of dist_to_z(j·x), via the best-approximation
// property of continued-fraction convergents.
inline BigRat min_multiple_distance(const BigRat& x, const BigInt& limit) {
    require(limit >= 2, "min_multiple_distance: limit >= 2");
    std::vector<BigInt> dens = convergent_denominators(x);
    BigRat best = dist_to_z(x);  // j = 1 always admissible
    for (const BigInt& d : dens) {
        if (d >= limit) break;
        BigRat v = dist_to_z(BigRat(d) * x);
        if (v < best) best = v;
    }
    return best;
}

}  // namespace dlab
