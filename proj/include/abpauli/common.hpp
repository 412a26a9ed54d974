#ifndef ABPAULI_COMMON_HPP
#define ABPAULI_COMMON_HPP

#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace abpauli {

using Complex = std::complex<double>;

inline constexpr double pi = 3.14159265358979323846264338327950288;
inline constexpr double euler_gamma = 0.57721566490153286060651209008240243;

/// Thrown when a numerical routine cannot meet its contract
/// (quadrature failure, ill-conditioned fit, invalid expansion regime).
class numeric_error : public std::runtime_error {
public:
    explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

class fit_error : public numeric_error {
public:
    explicit fit_error(const std::string& what) : numeric_error(what) {}
};

/// Complex value with a separate power-of-two exponent, for Bessel-product
/// chains whose factors individually over/underflow double range.
struct ScaledC {
    Complex v{0.0, 0.0};
    long e2 = 0;  // value represented = v * 2^e2

    void normalize() {
        double m = std::max(std::abs(v.real()), std::abs(v.imag()));
        if (m == 0.0 || !std::isfinite(m)) { e2 = 0; return; }
        int k = 0;
        std::frexp(m, &k);
        v = Complex(std::ldexp(v.real(), -k), std::ldexp(v.imag(), -k));
        e2 += k;
    }

    Complex value() const {
        if (v == Complex(0.0, 0.0)) return {0.0, 0.0};
        long e = e2;
        if (e > 4000) e = 4000;    // let it overflow to inf explicitly
        if (e < -4000) return {0.0, 0.0};
        return Complex(std::ldexp(v.real(), static_cast<int>(e)),
                       std::ldexp(v.imag(), static_cast<int>(e)));
    }

    friend ScaledC operator*(const ScaledC& a, const ScaledC& b) {
        ScaledC r{a.v * b.v, a.e2 + b.e2};
        r.normalize();
        return r;
    }
};

/// Static partition of [0, n) over nthreads workers. fn(i) must be
/// independent per index; no exception is allowed to escape a worker.
inline void parallel_for(std::size_t n, unsigned nthreads,
                         const std::function<void(std::size_t)>& fn) {
    if (n == 0) return;
    unsigned hw = std::thread::hardware_concurrency();
    if (nthreads == 0) nthreads = hw ? hw : 1;
    nthreads = static_cast<unsigned>(std::min<std::size_t>(nthreads, n));
    if (nthreads <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    std::size_t chunk = (n + nthreads - 1) / nthreads;
    for (unsigned t = 0; t < nthreads; ++t) {
        std::size_t lo = t * chunk, hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn] {
            for (std::size_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace abpauli

#endif
