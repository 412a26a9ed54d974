#ifndef ABPAULI_GREENFN_HPP
#define ABPAULI_GREENFN_HPP

// Green functions of the flux Pauli operator on the punctured plane:
// the Friedrichs kernel (contour-integral representation), the two
// spin-channel kernels obtained from it by a rank-one correction, their
// regular parts and leading small-z singularities, plus an independent
// partial-wave representation and small-r boundary-coefficient fits.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "abpauli/common.hpp"
#include "abpauli/quadrature.hpp"
#include "abpauli/specfun.hpp"

namespace abpauli::greenfn {

/// Flux parameter with derived constants. Values are clamped into
/// [1e-3, 1-1e-3]; the endpoint gamma factors blow up outside it.
struct FluxAlpha {
    double alpha;
    double nu_plus;   // 1 - alpha
    double nu_minus;  // alpha
    double c_alpha;   // sin(pi alpha) / (4 pi^2)

    explicit FluxAlpha(double a) {
        if (!std::isfinite(a)) throw std::domain_error("FluxAlpha: non-finite");
        constexpr double amin = 1e-3;
        alpha = std::clamp(a, amin, 1.0 - amin);
        nu_plus = 1.0 - alpha;
        nu_minus = alpha;
        c_alpha = std::sin(pi * alpha) / (4.0 * pi * pi);
    }
};

/// Spectral point z outside [0,inf) with its principal root Re sqrt(-z) > 0.
struct SpectralParameter {
    Complex z;
    Complex kappa;

    explicit SpectralParameter(Complex z_) : z(z_) {
        if (z.imag() == 0.0 && z.real() >= 0.0)
            throw std::domain_error("SpectralParameter: z on [0,inf)");
        kappa = std::sqrt(-z);
        if (kappa.real() <= 0.0) kappa = -kappa;
    }
};

struct PolarPoint {
    double r;
    double theta;  // in (-pi, pi]
};

enum class Spin { plus, minus };

struct EvalParams {
    double quad_tol = 1e-11;  // absolute tolerance of the s-integral
    double phi_eps = 1e-6;    // clamp distance from the angular cut
};

inline double nu_of(const FluxAlpha& a, Spin s) {
    return s == Spin::plus ? a.nu_plus : a.nu_minus;
}

inline Complex spin_phase(Spin s, double theta, double theta0) {
    return s == Spin::plus ? std::exp(Complex(0.0, -(theta - theta0)))
                           : Complex(1.0, 0.0);
}

/// Piecewise phase factor of the Friedrichs kernel; phi = theta - theta0.
inline Complex c_hat(double phi, const FluxAlpha& a) {
    if (std::abs(phi - pi) < 1e-9 || std::abs(phi + pi) < 1e-9)
        throw std::domain_error("c_hat: phi at the excluded cut +-pi");
    if (!(phi > -2.0 * pi && phi < 2.0 * pi))
        throw std::domain_error("c_hat: phi outside (-2pi, 2pi)");
    const double inv2pi = 1.0 / (2.0 * pi);
    if (phi > -pi && phi < pi) return {inv2pi, 0.0};
    if (phi > pi)
        return inv2pi * std::exp(Complex(0.0, 2.0 * pi * a.alpha));
    return inv2pi * std::exp(Complex(0.0, -2.0 * pi * a.alpha));
}

namespace detail {

inline double clamp_phi(double phi, double phi_eps) {
    for (double cut : {pi, -pi}) {
        double d = phi - cut;
        if (std::abs(d) < phi_eps) {
            if (d == 0.0) return cut - phi_eps;  // continuous: side is free
            return cut + (d > 0.0 ? phi_eps : -phi_eps);
        }
    }
    return phi;
}

// (1/2pi) int K_0(kappa R(s)) e^{-alpha s + i alpha phi} / (1+e^{-s+i phi}) ds
// on the truncation window where the K_0 factor has decayed below 1e-16 of
// the running scale; Gauss-Kronrod panels refined near the s = 0 pole
// approach when |phi| is close to pi.
inline Complex s_integral(const FluxAlpha& a, const SpectralParameter& sp,
                          double r, double r0, double phi,
                          const EvalParams& p) {
    const Complex kap = sp.kappa;
    const double rk = kap.real();
    const double geo = std::sqrt(r * r0);
    double S = 2.0 * std::log(50.0 / std::max(rk * geo, 1e-280)) + 4.0;
    S = std::clamp(S, 10.0, 1400.0);

    const Complex eiphi = std::exp(Complex(0.0, phi));
    const Complex phase = std::exp(Complex(0.0, a.alpha * phi));
    auto f = [&](double s) -> Complex {
        double R = std::sqrt(r * r + r0 * r0 + 2.0 * r * r0 * std::cosh(s));
        Complex w = kap * R;
        if (w.real() > 700.0) return {0.0, 0.0};
        Complex k0 = specfun::bessel_k(0.0, w);
        Complex den = 1.0 + std::exp(-s) * eiphi;
        return k0 * std::exp(-a.alpha * s) * phase / den;
    };

    std::vector<double> breaks{0.0};
    for (double b = 1.0; b < S; b *= 2.0) {
        breaks.push_back(b);
        breaks.push_back(-b);
    }
    breaks.push_back(S);
    breaks.push_back(-S);
    double dcut = std::min(std::abs(std::abs(phi) - pi),
                           std::abs(std::abs(phi) - 3.0 * pi));
    if (dcut < 0.5) {
        double d = std::max(dcut, 0.25 * p.phi_eps);
        for (double m : {1.0, 4.0, 16.0, 64.0, 256.0}) {
            if (d * m < 1.0) {
                breaks.push_back(d * m);
                breaks.push_back(-d * m);
            }
        }
    }
    Complex val = quad::adaptive_gk(f, breaks, 0.5 * p.quad_tol, 1e-13, 3000);
    return val / (2.0 * pi);
}

inline void require_offdiagonal(const PolarPoint& x, const PolarPoint& x0,
                                double dist2) {
    double scale = (x.r + x0.r) * (x.r + x0.r);
    if (!(dist2 > 1e-28 * scale))
        throw numeric_error("green: coincident evaluation points");
}

}  // namespace detail

/// Friedrichs Green function of the gauge-transformed flux Laplacian.
inline Complex green_friedrichs(const FluxAlpha& a, const SpectralParameter& sp,
                                const PolarPoint& x, const PolarPoint& x0,
                                const EvalParams& p = {}) {
    if (!(x.r > 0.0) || !(x0.r > 0.0))
        throw std::domain_error("green_friedrichs: requires r, r0 > 0");
    double phi = detail::clamp_phi(x.theta - x0.theta, p.phi_eps);
    double dist2 =
        x.r * x.r + x0.r * x0.r - 2.0 * x.r * x0.r * std::cos(phi);
    detail::require_offdiagonal(x, x0, dist2);
    Complex head = c_hat(phi, a) *
                   specfun::bessel_k(0.0, sp.kappa * std::sqrt(dist2));
    Complex tail = detail::s_integral(a, sp, x.r, x0.r, phi, p);
    return head - (std::sin(pi * a.alpha) / pi) * tail;
}

/// Spin-channel Green function: gauge-conjugated Friedrichs kernel plus the
/// rank-one Bessel product of the maximal extension.
inline Complex green_pauli(const FluxAlpha& a, const SpectralParameter& sp,
                           const PolarPoint& x, const PolarPoint& x0, Spin s,
                           const EvalParams& p = {}) {
    Complex g = green_friedrichs(a, sp, x, x0, p);
    Complex gauge = std::exp(Complex(0.0, -a.alpha * (x.theta - x0.theta)));
    double nu = nu_of(a, s);
    Complex rank1 = specfun::bessel_k(nu, sp.kappa * x.r) *
                    specfun::bessel_k(nu, sp.kappa * x0.r);
    return gauge * g + (std::sin(pi * a.alpha) / (pi * pi)) * rank1 *
                           spin_phase(s, x.theta, x0.theta);
}

/// Leading small-z singularity of the spin-channel kernel.
inline Complex leading_singularity(const FluxAlpha& a,
                                   const SpectralParameter& sp,
                                   const PolarPoint& x, const PolarPoint& x0,
                                   Spin s) {
    if (!(x.r > 0.0) || !(x0.r > 0.0))
        throw std::domain_error("leading_singularity: requires r, r0 > 0");
    double nu = nu_of(a, s);
    double gnu = specfun::gamma_real(nu);
    Complex base = -sp.z * x.r * x0.r / 4.0;
    Complex pw = std::exp(-nu * std::log(base));
    return a.c_alpha * gnu * gnu * pw * spin_phase(s, x.theta, x0.theta);
}

/// Regular part: green_pauli minus leading_singularity, evaluated from its
/// own subtracted Bessel-product formula (stays bounded as z -> 0).
inline Complex green_regular(const FluxAlpha& a, const SpectralParameter& sp,
                             const PolarPoint& x, const PolarPoint& x0, Spin s,
                             const EvalParams& p = {}) {
    Complex g = green_friedrichs(a, sp, x, x0, p);
    Complex gauge = std::exp(Complex(0.0, -a.alpha * (x.theta - x0.theta)));
    double nu = nu_of(a, s);
    double gnu = specfun::gamma_real(nu);
    Complex kk = specfun::bessel_k(nu, sp.kappa * x.r) *
                 specfun::bessel_k(nu, sp.kappa * x0.r);
    Complex pw = std::exp(-nu * std::log(-sp.z * x.r * x0.r / 4.0));
    Complex corr = a.c_alpha * (4.0 * kk - gnu * gnu * pw);
    return gauge * g + corr * spin_phase(s, x.theta, x0.theta);
}

struct PartialWave {
    Complex value;
    double tail_bound;
};

/// Partial-wave representation of the gauge-transformed Friedrichs
/// resolvent; independent of the contour-integral route.
inline PartialWave partial_wave_green(const FluxAlpha& a,
                                      const SpectralParameter& sp,
                                      const PolarPoint& x, const PolarPoint& x0,
                                      int m_max) {
    if (m_max < 1) throw std::domain_error("partial_wave_green: m_max < 1");
    if (!(x.r > 0.0) || !(x0.r > 0.0))
        throw std::domain_error("partial_wave_green: requires r, r0 > 0");
    const double phi = x.theta - x0.theta;
    const Complex kap = sp.kappa;
    const double rlt = std::min(x.r, x0.r), rgt = std::max(x.r, x0.r);

    // orders m + alpha for m >= 0 and |m + alpha| = (1-alpha) + j for m < 0
    auto kpos = specfun::bessel_k_scaled_family(a.alpha, m_max + 1, kap * rgt);
    auto kneg =
        specfun::bessel_k_scaled_family(1.0 - a.alpha, m_max, kap * rgt);

    Complex sum(0.0, 0.0);
    double last = 0.0, second_last = 0.0;
    for (int am = m_max; am >= 0; --am) {
        // descending order so small high-m terms accumulate first
        for (int sgn : {+1, -1}) {
            int m = sgn * am;
            if (am == 0 && sgn < 0) continue;
            double order = std::abs(m + a.alpha);
            ScaledC kv = (m >= 0) ? kpos[m] : kneg[-m - 1];
            ScaledC iv = specfun::bessel_i_scaled(order, kap * rlt);
            Complex term = (iv * kv).value();
            sum += std::exp(Complex(0.0, m * phi)) * term;
            if (am == m_max && sgn > 0) last = std::abs(term);
            if (am == m_max - 1 && sgn > 0) second_last = std::abs(term);
        }
    }
    double ratio = (second_last > 0.0) ? std::min(last / second_last, 0.95) : 0.5;
    double tail = 2.0 * last * ratio / (1.0 - ratio);
    Complex val =
        std::exp(Complex(0.0, a.alpha * phi)) * sum / (2.0 * pi);
    return {val, tail / (2.0 * pi)};
}

/// |2 pi C_hat(phi) - (sin(pi a)/pi) e^{i a phi} int e^{-a s}/(1+e^{-s+i phi})|
/// via the module's own Gauss-Kronrod rule.
inline double residue_check(const FluxAlpha& a, double phi) {
    if (std::abs(std::abs(phi) - pi) < 1e-3)
        throw std::domain_error("residue_check: phi too close to +-pi");
    const Complex eiphi = std::exp(Complex(0.0, phi));
    auto f = [&](double s) -> Complex {
        return std::exp(-a.alpha * s) / (1.0 + std::exp(-s) * eiphi);
    };
    double S = 40.0 / std::min(a.alpha, 1.0 - a.alpha);
    std::vector<double> breaks{0.0, S, -S};
    for (double b = 1.0; b < S; b *= 2.0) {
        breaks.push_back(b);
        breaks.push_back(-b);
    }
    double dcut = std::abs(std::abs(phi) - pi);
    for (double m : {1.0, 4.0, 16.0, 64.0}) {
        if (dcut * m < 1.0) {
            breaks.push_back(dcut * m);
            breaks.push_back(-dcut * m);
        }
    }
    Complex integral = quad::adaptive_gk(f, breaks, 1e-12, 1e-13, 3000);
    Complex lhs = 2.0 * pi * c_hat(phi, a) -
                  (std::sin(pi * a.alpha) / pi) *
                      std::exp(Complex(0.0, a.alpha * phi)) * integral;
    return std::abs(lhs);
}

struct BoundaryFitOptions {
    double r_min = 1e-6;
    double r_max = 1e-3;
    int n_r = 24;
    int n_theta = 32;
    double cond_limit = 1e8;
};

/// Least-squares coefficients of the admitted small-r powers: the e^{i theta}
/// angular mode against {r^{-(1-a)}, r^{1-a}} and the constant mode against
/// {r^{-a}, r^{a}}. Column norms are reported so callers can compare
/// coefficients scale-free.
struct BoundaryFit {
    Complex phi1_m1, phi2_m1;  // e^{i theta} mode coefficients
    Complex phi1_0, phi2_0;    // constant mode coefficients
    double resid_m1, resid_0;
    double colnorm_m1_sing, colnorm_m1_reg;
    double colnorm_0_sing, colnorm_0_reg;
};

namespace detail {

struct TwoTermFit {
    Complex c1, c2;
    double resid, n1, n2;
};

inline TwoTermFit ls_two_powers(const std::vector<double>& r,
                                const std::vector<Complex>& y, double mu,
                                double cond_limit) {
    const std::size_t n = r.size();
    std::vector<double> c1(n), c2(n);
    double n1 = 0, n2 = 0;
    for (std::size_t i = 0; i < n; ++i) {
        c1[i] = std::pow(r[i], -mu);
        c2[i] = std::pow(r[i], mu);
        n1 += c1[i] * c1[i];
        n2 += c2[i] * c2[i];
    }
    n1 = std::sqrt(n1);
    n2 = std::sqrt(n2);
    // equilibrated Gram matrix and its condition number
    double g11 = 0, g22 = 0, g12 = 0;
    Complex b1(0, 0), b2(0, 0);
    for (std::size_t i = 0; i < n; ++i) {
        double u = c1[i] / n1, v = c2[i] / n2;
        g11 += u * u;
        g22 += v * v;
        g12 += u * v;
        b1 += u * y[i];
        b2 += v * y[i];
    }
    double tr = g11 + g22, det = g11 * g22 - g12 * g12;
    double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
    double lmax = tr / 2.0 + disc, lmin = tr / 2.0 - disc;
    if (!(lmin > 0.0) || std::sqrt(lmax / lmin) > cond_limit)
        throw fit_error("boundary_fit: ill-conditioned two-power fit");
    Complex a1 = (g22 * b1 - g12 * b2) / det;
    Complex a2 = (g11 * b2 - g12 * b1) / det;
    double resid2 = 0;
    for (std::size_t i = 0; i < n; ++i) {
        Complex e = y[i] - a1 * (c1[i] / n1) - a2 * (c2[i] / n2);
        resid2 += std::norm(e);
    }
    return {a1 / n1, a2 / n2, std::sqrt(resid2), n1, n2};
}

}  // namespace detail

inline BoundaryFit boundary_fit(
    const std::function<Complex(double, double)>& f, const FluxAlpha& a,
    const BoundaryFitOptions& opt = {}) {
    if (opt.n_theta < 16)
        throw std::domain_error("boundary_fit: need >= 16 angular points");
    std::vector<double> rs(opt.n_r);
    double lr0 = std::log(opt.r_min), lr1 = std::log(opt.r_max);
    for (int i = 0; i < opt.n_r; ++i)
        rs[i] = std::exp(lr0 + (lr1 - lr0) * i / (opt.n_r - 1.0));

    std::vector<Complex> mode0(opt.n_r), mode_m1(opt.n_r);
    for (int i = 0; i < opt.n_r; ++i) {
        Complex s0(0, 0), s1(0, 0);
        for (int j = 0; j < opt.n_theta; ++j) {
            double th = -pi + (j + 0.5) * 2.0 * pi / opt.n_theta;
            Complex v = f(rs[i], th);
            s0 += v;
            s1 += v * std::exp(Complex(0.0, th));
        }
        mode0[i] = s0 / (double)opt.n_theta;
        mode_m1[i] = s1 / (double)opt.n_theta;
    }
    auto fm1 = detail::ls_two_powers(rs, mode_m1, 1.0 - a.alpha, opt.cond_limit);
    auto f0 = detail::ls_two_powers(rs, mode0, a.alpha, opt.cond_limit);
    return BoundaryFit{fm1.c1, fm1.c2, f0.c1,          f0.c2,
                       fm1.resid, f0.resid, fm1.n1,    fm1.n2,
                       f0.n1,     f0.n2};
}

}  // namespace abpauli::greenfn

#endif
