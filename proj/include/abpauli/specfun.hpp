#ifndef ABPAULI_SPECFUN_HPP
#define ABPAULI_SPECFUN_HPP

// Special functions on the right half-plane: Gamma, modified Bessel I_nu /
// K_nu for real order (fractional orders up to |m|+1 via recurrence), and
// the log-split of K_0 used to regularize coincident-node kernel entries.
//
// K_nu evaluation regions for nu in [0,1):
//   |w| <= 3    power series (K_0 log series / I-difference)
//   |w| <= 30   real-axis integral representation, contour tilted when
//               |ph w| > pi/4 so the decay rate stays >= |w|/sqrt(2)
//   |w| > 30    Hankel asymptotic expansion
// All routines are pure; caches are immutable after first use.

#include <cmath>
#include <complex>
#include <vector>

#include "abpauli/common.hpp"
#include "abpauli/quadrature.hpp"

namespace abpauli::specfun {

inline double gamma_real(double x) {
    if (!(x > 0.0)) throw std::domain_error("gamma_real: requires x > 0");
    return std::tgamma(x);
}

namespace detail {

inline void require_right_half_plane(const Complex& w, const char* who) {
    if (!(w.real() > 0.0))
        throw std::domain_error(std::string(who) + ": requires Re w > 0");
}

inline double harmonic(int k) {
    static const std::vector<double> table = [] {
        std::vector<double> h(81, 0.0);
        for (int i = 1; i <= 80; ++i) h[i] = h[i - 1] + 1.0 / i;
        return h;
    }();
    return table[k];
}

// I_nu power series; valid for any nu > -1 (callers keep |w| moderate).
inline Complex bessel_i_series(double nu, Complex w) {
    const Complex q = 0.25 * w * w;
    Complex term(1.0, 0.0), sum(1.0, 0.0);
    for (int k = 1; k <= 400; ++k) {
        term *= q / (k * (k + nu));
        sum += term;
        if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    }
    // prefactor (w/2)^nu / Gamma(nu+1) via logs to dodge overflow at big nu
    Complex ln0 = nu * std::log(0.5 * w) - std::lgamma(nu + 1.0);
    return std::exp(ln0) * sum;
}

inline ScaledC bessel_i_series_scaled(double nu, Complex w) {
    const Complex q = 0.25 * w * w;
    Complex term(1.0, 0.0), sum(1.0, 0.0);
    for (int k = 1; k <= 400; ++k) {
        term *= q / (k * (k + nu));
        sum += term;
        if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    }
    Complex ln0 = nu * std::log(0.5 * w) - std::lgamma(nu + 1.0);
    double e2d = ln0.real() / 0.6931471805599453;
    long e2 = (long)std::floor(e2d);
    Complex mant = std::exp(ln0 - (double)e2 * 0.6931471805599453);
    ScaledC r{mant * sum, e2};
    r.normalize();
    return r;
}

// Hankel-type asymptotic series sum_k a_k(nu)/w^k, optimally truncated.
inline Complex hankel_sum(double nu, Complex w, int sign) {
    // sign=+1: K-type (all +), sign=-1: alternating (I dominant series)
    Complex sum(1.0, 0.0), term(1.0, 0.0);
    double prev = 1e300;
    for (int k = 1; k <= 60; ++k) {
        double num = 4.0 * nu * nu - (2.0 * k - 1.0) * (2.0 * k - 1.0);
        term *= num / (8.0 * k) / w;
        Complex t = (sign < 0 && (k & 1)) ? -term : term;
        double mag = std::abs(term);
        if (mag >= prev) break;  // past optimal truncation
        sum += t;
        prev = mag;
        if (mag < 1e-18 * std::abs(sum)) break;
    }
    return sum;
}

inline Complex bessel_k_asymptotic(double nu, Complex w) {
    Complex s = hankel_sum(nu, w, +1);
    return std::sqrt(pi / (2.0 * w)) * std::exp(-w) * s;
}

inline Complex bessel_i_asymptotic(double nu, Complex w) {
    Complex s1 = hankel_sum(nu, w, -1);
    Complex s2 = hankel_sum(nu, w, +1);
    double sgn = (w.imag() >= 0.0) ? 1.0 : -1.0;
    Complex refl = std::exp(Complex(0.0, sgn * pi * (nu + 0.5)));
    Complex pref = 1.0 / std::sqrt(2.0 * pi * w);
    return pref * (std::exp(w) * s1 + refl * std::exp(-w) * s2);
}

// K_nu, nu in [0,1), |w| <= 3, by series.
inline Complex bessel_k_series01(double nu, Complex w) {
    const Complex q = 0.25 * w * w;
    if (nu == 0.0) {
        // K_0 = -(log(w/2)+gamma) I_0 + sum_{k>=1} H_k (w/2)^{2k}/(k!)^2
        Complex i0(1.0, 0.0), term(1.0, 0.0), hsum(0.0, 0.0);
        for (int k = 1; k <= 60; ++k) {
            term *= q / ((double)k * k);
            i0 += term;
            hsum += harmonic(k) * term;
            if (std::abs(term) < 1e-18) break;
        }
        return -(std::log(0.5 * w) + euler_gamma) * i0 + hsum;
    }
    // K_nu = pi/(2 sin(pi nu)) [ I_{-nu} - I_nu ]
    Complex um = std::exp(-nu * std::log(0.5 * w)) / std::tgamma(1.0 - nu);
    Complex up = std::exp(nu * std::log(0.5 * w)) / std::tgamma(1.0 + nu);
    Complex sum = um - up;
    for (int k = 1; k <= 80; ++k) {
        um *= q / (k * (k - nu));
        up *= q / (k * (k + nu));
        sum += um - up;
        if (std::abs(um) + std::abs(up) < 1e-18 * (1.0 + std::abs(sum))) break;
    }
    return (pi / (2.0 * std::sin(pi * nu))) * sum;
}

// K_nu, nu in [0,1), 3 < |w| <= 30, via int_0^inf e^{-w cosh t} cosh(nu t) dt.
// For |ph w| > pi/4 the ray is tilted by phi = |ph w| - pi/4, picking up a
// short arc piece, so the integrand keeps decay rate >= |w|/sqrt(2).
inline Complex bessel_k_integral01(double nu, Complex w) {
    const double ph = std::arg(w);
    const double aph = std::abs(ph);
    Complex arcpart(0.0, 0.0);
    double phi = 0.0, s = (ph >= 0.0 ? 1.0 : -1.0);
    double rate;  // effective exponential decay rate along the line
    if (aph > 0.25 * pi) {
        phi = aph - 0.25 * pi;
        rate = std::abs(w) * std::cos(0.25 * pi);
        const auto& gl = quad::gauss_legendre_cached(24);
        for (int i = 0; i < 24; ++i) {
            double u = 0.5 * phi * (gl.x[i] + 1.0);
            Complex f = std::exp(-w * std::cos(u)) * std::cos(nu * u);
            arcpart += gl.w[i] * f;
        }
        arcpart *= Complex(0.0, -s) * 0.5 * phi;
    } else {
        rate = w.real();
    }
    // line piece: t from 0 to infinity along t - i s phi
    const double cuts[5] = {0.0, 1.0, 4.0, 12.0, 45.0};
    Complex line(0.0, 0.0);
    const auto& gl = quad::gauss_legendre_cached(24);
    for (int p = 0; p < 4; ++p) {
        double t0 = std::acosh(1.0 + cuts[p] / rate);
        double t1 = std::acosh(1.0 + cuts[p + 1] / rate);
        for (int i = 0; i < 24; ++i) {
            double t = 0.5 * (t1 - t0) * (gl.x[i] + 1.0) + t0;
            Complex zeta(t, -s * phi);
            Complex f = std::exp(-w * std::cosh(zeta)) * std::cosh(nu * zeta);
            line += gl.w[i] * 0.5 * (t1 - t0) * f;
        }
    }
    return arcpart + line;
}

inline Complex bessel_k01(double nu, Complex w) {
    double aw = std::abs(w);
    if (aw <= 3.0) return bessel_k_series01(nu, w);
    if (aw <= 30.0) return bessel_k_integral01(nu, w);
    return bessel_k_asymptotic(nu, w);
}

}  // namespace detail

/// I_nu(w) for real order nu > -1, Re w > 0 (w = 0 allowed for nu >= 0).
inline Complex bessel_i(double nu, Complex w) {
    if (nu <= -1.0) throw std::domain_error("bessel_i: requires nu > -1");
    if (w == Complex(0.0, 0.0)) {
        if (nu == 0.0) return {1.0, 0.0};
        if (nu > 0.0) return {0.0, 0.0};
        throw std::domain_error("bessel_i: w = 0 with negative order");
    }
    detail::require_right_half_plane(w, "bessel_i");
    if (std::abs(w) <= 30.0) return detail::bessel_i_series(nu, w);
    return detail::bessel_i_asymptotic(nu, w);
}

/// K_nu(w) for nu >= 0 non-integer (or nu = 0), Re w > 0.
inline Complex bessel_k(double nu, Complex w) {
    if (nu < 0.0) nu = -nu;  // K is even in the order
    double frac = nu - std::floor(nu);
    if (nu > 0.0 && (frac == 0.0 || std::abs(std::sin(pi * frac)) < 1e-6))
        throw std::domain_error(
            "bessel_k: integer and near-integer positive orders unsupported");
    detail::require_right_half_plane(w, "bessel_k");
    if (nu < 1.0) return detail::bessel_k01(nu, w);
    // upward recurrence K_{mu+1} = K_{mu-1} + (2 mu / w) K_mu
    double mu = frac;
    Complex km1 = detail::bessel_k01(mu, w);
    Complex k0 = detail::bessel_k01(1.0 - mu, w);  // K_{mu-1} = K_{1-mu}
    Complex prev = k0, cur = km1;
    double order = mu;
    while (order + 1.0 <= nu + 1e-12) {
        Complex next = prev + (2.0 * order / w) * cur;
        prev = cur;
        cur = next;
        order += 1.0;
    }
    return cur;
}

/// Scaled K_{mu0 + j}, j = 0..count-1, for mu0 in (0,1); stable upward
/// recurrence with power-of-two renormalization.
inline std::vector<ScaledC> bessel_k_scaled_family(double mu0, int count,
                                                   Complex w) {
    detail::require_right_half_plane(w, "bessel_k_scaled_family");
    std::vector<ScaledC> out;
    out.reserve(count);
    ScaledC cur{detail::bessel_k01(mu0, w), 0};
    cur.normalize();
    ScaledC prev{detail::bessel_k01(1.0 - mu0, w), 0};  // K_{mu0 - 1}
    prev.normalize();
    double order = mu0;
    for (int j = 0; j < count; ++j) {
        out.push_back(cur);
        // next = prev + (2 order / w) cur, aligned to cur's exponent
        Complex pv = prev.v * std::ldexp(1.0, (int)std::max(
                         -1000L, std::min(1000L, prev.e2 - cur.e2)));
        ScaledC next{pv + (2.0 * order / w) * cur.v, cur.e2};
        next.normalize();
        prev = cur;
        cur = next;
        order += 1.0;
    }
    return out;
}

/// Scaled K_nu for non-integer nu >= 0 (or nu = 0).
inline ScaledC bessel_k_scaled(double nu, Complex w) {
    if (nu < 0.0) nu = -nu;
    if (nu < 1.0) {
        detail::require_right_half_plane(w, "bessel_k_scaled");
        ScaledC r{detail::bessel_k01(nu, w), 0};
        r.normalize();
        return r;
    }
    double frac = nu - std::floor(nu);
    int steps = (int)std::lround(nu - frac);
    return bessel_k_scaled_family(frac, steps + 1, w)[steps];
}

/// Scaled I_nu for nu > -1 (series; callers keep |w| <= 30).
inline ScaledC bessel_i_scaled(double nu, Complex w) {
    if (w == Complex(0.0, 0.0))
        return ScaledC{Complex(nu == 0.0 ? 1.0 : 0.0, 0.0), 0};
    detail::require_right_half_plane(w, "bessel_i_scaled");
    if (std::abs(w) <= 30.0) return detail::bessel_i_series_scaled(nu, w);
    ScaledC r{detail::bessel_i_asymptotic(nu, w), 0};
    r.normalize();
    return r;
}

struct K0Split {
    Complex f;  // K_0(w) = log(w) f(w) + g(w); f = -I_0(w), f(0) = -1
    Complex g;
};

/// Log-split of K_0; f, g entire, f(w) - f(0) = O(w^2).
inline K0Split k0_split(Complex w) {
    detail::require_right_half_plane(w, "k0_split");
    Complex f = -bessel_i(0.0, w);
    Complex g;
    if (std::abs(w) <= 12.0) {
        // g = (log 2 - gamma) I_0(w) + sum_{k>=1} H_k (w/2)^{2k}/(k!)^2
        const Complex q = 0.25 * w * w;
        Complex i0(1.0, 0.0), term(1.0, 0.0), hsum(0.0, 0.0);
        for (int k = 1; k <= 80; ++k) {
            term *= q / ((double)k * k);
            i0 += term;
            hsum += detail::harmonic(k) * term;
            if (std::abs(term) < 1e-18 * std::abs(i0)) break;
        }
        g = (std::log(2.0) - euler_gamma) * i0 + hsum;
    } else {
        g = bessel_k(0.0, w) - std::log(w) * f;
    }
    return {f, g};
}

}  // namespace abpauli::specfun

#endif
