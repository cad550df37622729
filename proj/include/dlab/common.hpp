#pragma once
// Shared basics: error type, constants, small numeric helpers.

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace dlab {

using cplx = std::complex<double>;

inline constexpr double PI = 3.141592653589793238462643383279502884;
inline constexpr double TWO_PI = 2.0 * PI;

// All misuse of the library surfaces as this exception type.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw Error(msg);
}

inline bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

// 64-byte aligned allocator so FFT plans can execute directly on field
// storage (no staging copies in the hot path).
template <class T>
struct AlignedAlloc {
    using value_type = T;
    AlignedAlloc() = default;
    template <class U>
    AlignedAlloc(const AlignedAlloc<U>&) {}
    T* allocate(std::size_t n) {
        std::size_t bytes = (n * sizeof(T) + 63) / 64 * 64;
        void* p = std::aligned_alloc(64, bytes);
        if (!p) throw std::bad_alloc();
        return static_cast<T*>(p);
    }
    void deallocate(T* p, std::size_t) { std::free(p); }
    template <class U>
    bool operator==(const AlignedAlloc<U>&) const { return true; }
};

using RealVec = std::vector<double, AlignedAlloc<double>>;
using CplxVec = std::vector<std::complex<double>, AlignedAlloc<std::complex<double>>>;

inline double sq(double x) { return x * x; }

}  // namespace dlab
