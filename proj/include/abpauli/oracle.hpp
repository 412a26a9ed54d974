#ifndef ABPAULI_ORACLE_HPP
#define ABPAULI_ORACLE_HPP

// Independent verification paths. Each oracle deliberately uses a different
// quadrature scheme or discretization from the module it cross-checks;
// shared code is limited to the special functions.

#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "abpauli/common.hpp"
#include "abpauli/greenfn.hpp"
#include "abpauli/potential.hpp"
#include "abpauli/quadrature.hpp"
#include "abpauli/specfun.hpp"
#include "abpauli/weakcoupling.hpp"

namespace abpauli::oracle {

using greenfn::FluxAlpha;
using greenfn::Spin;
using potential::PotentialSpec;

/// |2 pi C_hat(phi) - (sin(pi a)/pi) e^{i a phi} int e^{-a s}/(1+e^{-s+i phi})|
/// via tanh-sinh quadrature of the two half-line pieces mapped by
/// u = e^{-|s|}, which puts the integrable endpoint singularities at zero.
inline double residue_residual(const FluxAlpha& a, double phi) {
    if (!(phi > -2.0 * pi && phi < 2.0 * pi))
        throw std::domain_error("residue_residual: phi outside (-2pi, 2pi)");
    if (std::abs(std::abs(phi) - pi) <= 1e-3)
        throw std::domain_error("residue_residual: phi within 1e-3 of the cut");
    const Complex eiphi = std::exp(Complex(0.0, phi));
    const double al = a.alpha;
    auto f_pos = [&](double u) -> Complex {  // s in (0, inf), u = e^{-s}
        return std::pow(u, al - 1.0) / (1.0 + u * eiphi);
    };
    auto f_neg = [&](double u) -> Complex {  // s in (-inf, 0), u = e^{s}
        return std::pow(u, -al) / (u + eiphi);
    };
    Complex integral = quad::tanh_sinh(f_pos, 0.0, 1.0, 1e-13, 14) +
                       quad::tanh_sinh(f_neg, 0.0, 1.0, 1e-13, 14);
    Complex lhs = 2.0 * pi * greenfn::c_hat(phi, a) -
                  (std::sin(pi * al) / pi) *
                      std::exp(Complex(0.0, al * phi)) * integral;
    return std::abs(lhs);
}

/// Residual of the three-term small-z expansion of K_nu(kr) K_nu(kr0);
/// decays like |z|^{min(alpha, 1-alpha)}.
inline double kk_product_residual(const FluxAlpha& a, double z, double r,
                                  double r0, Spin s) {
    if (!(z < 0.0) || !(r > 0.0) || !(r0 > 0.0))
        throw std::domain_error("kk_product_residual: needs z < 0, radii > 0");
    double nu = greenfn::nu_of(a, s);
    double kap = std::sqrt(-z);
    Complex prod = specfun::bessel_k(nu, Complex(kap * r, 0.0)) *
                   specfun::bessel_k(nu, Complex(kap * r0, 0.0));
    double gn = specfun::gamma_real(nu);
    double gc = specfun::gamma_real(1.0 - nu);
    double t1 = std::pow(-z, -nu) * 0.25 * gn * gn * std::pow(r * r0 / 4.0, -nu);
    double t2 = -gn * gc / (4.0 * nu) *
                (std::pow(r0 / r, nu) + std::pow(r / r0, nu));
    double t3 = std::pow(gc / (2.0 * nu), 2.0) * std::pow(-z, nu) *
                std::pow(r * r0 / 4.0, nu);
    return std::abs(prod - Complex(t1 + t2 + t3, 0.0));
}

/// Independent midpoint-rule evaluation of U on polar cells. The radial
/// mesh is graded toward the origin with exponent 1/(2 - 2 nu), which
/// resolves the integrable r^{-2 nu} weight at first order in 1/n, and
/// cells are split at disk edges.
inline weakcoupling::CouplingMatrix brute_U(const FluxAlpha& a,
                                            const PotentialSpec& pot, int n) {
    if (n < 64) throw std::domain_error("brute_U: n < 64");
    weakcoupling::CouplingMatrix u;
    if (pot.empty()) return u;
    double R = pot.support_radius();
    double nu = std::max(a.alpha, 1.0 - a.alpha);
    double p = 1.0 / (2.0 - 2.0 * nu);
    p = std::min(p, 4.0);

    std::vector<double> bounds;
    bounds.reserve(n + 8);
    for (int k = 0; k <= n; ++k)
        bounds.push_back(R * std::pow((double)k / n, p));
    for (double e : pot.edge_radii())
        if (e > 0.0 && e < R) bounds.push_back(e);
    std::sort(bounds.begin(), bounds.end());
    bounds.erase(std::unique(bounds.begin(), bounds.end()), bounds.end());

    double g1 = specfun::gamma_real(1.0 - a.alpha);
    double g2 = specfun::gamma_real(a.alpha);
    double c1 = a.c_alpha * g1 * g1, c2 = a.c_alpha * g2 * g2;
    Complex s11(0.0, 0.0), s22(0.0, 0.0);
    const double dth = 2.0 * pi / n;
    for (std::size_t k = 0; k + 1 < bounds.size(); ++k) {
        double rm = 0.5 * (bounds[k] + bounds[k + 1]);
        double area_r = 0.5 * (bounds[k + 1] * bounds[k + 1] -
                               bounds[k] * bounds[k]);
        // angular midpoint cells sum to exactly n * dth for radial terms
        Complex v11 = pot.v11_at(rm) * (n * dth);
        Complex v22 = pot.v22_at(rm) * (n * dth);
        s11 += v11 * std::pow(0.5 * rm, 2.0 * (a.alpha - 1.0)) * area_r;
        s22 += v22 * std::pow(0.5 * rm, -2.0 * a.alpha) * area_r;
    }
    u.u11 = c1 * s11;
    u.u22 = c2 * s22;
    return u;
}

enum class BoundaryCondition { maximal, friedrichs };

struct RadialGrid1D {
    double r_min = 1e-4;
    double r_max = 40.0;
    int n = 4000;
    BoundaryCondition bc = BoundaryCondition::maximal;
};

namespace detail {

// number of eigenvalues of the symmetric tridiagonal pencil (A, M) below
// lambda, by the Sturm count of the LDL^T pivots of A - lambda M
inline int sturm_count(const std::vector<double>& diag,
                       const std::vector<double>& off,
                       const std::vector<double>& mass, double lambda) {
    int count = 0;
    double d = diag[0] - lambda * mass[0];
    if (d < 0.0) ++count;
    for (std::size_t i = 1; i < diag.size(); ++i) {
        double denom = (d == 0.0) ? 1e-300 : d;
        d = diag[i] - lambda * mass[i] - off[i - 1] * off[i - 1] / denom;
        if (d < 0.0) ++count;
    }
    return count;
}

}  // namespace detail

/// Lowest eigenvalue of -u'' + ((mu^2 - 1/4)/r^2) u + eps v(r) u on the
/// log grid, with the Robin condition at r_min selecting the admitted
/// power (maximal: f ~ r^{-mu}; friedrichs: f ~ r^{+mu}) and Dirichlet at
/// r_max. Returns nothing when no negative eigenvalue exists.
inline std::optional<double> radial_fd_ground_state(
    const FluxAlpha& a, double eps, const PotentialSpec& pot, Spin spin,
    const RadialGrid1D& grid = {}) {
    for (const auto* comp : {&pot.v11, &pot.v22})
        for (const auto& t : *comp)
            if (t.amplitude.imag() != 0.0)
                throw std::invalid_argument(
                    "radial_fd_ground_state: real potentials only");
    if (!(grid.r_min > 0.0) || !(grid.r_max > grid.r_min) || grid.n < 16)
        throw std::domain_error("radial_fd_ground_state: bad grid");

    const double mu = greenfn::nu_of(a, spin);
    auto v = [&](double r) {
        return (spin == Spin::plus) ? pot.v11_at(r).real()
                                    : pot.v22_at(r).real();
    };
    // substitution r = e^t, u = e^{t/2} W:
    //   (-d^2/dt^2 + mu^2 + eps v(e^t) e^{2t}) W = z e^{2t} W
    const int n = grid.n;
    const double t0 = std::log(grid.r_min), t1 = std::log(grid.r_max);
    const double h = (t1 - t0) / (n - 1);
    const double gw =
        (grid.bc == BoundaryCondition::maximal) ? -mu : mu;  // W'/W at t0

    // Dirichlet drops the last node; node 0 carries the Robin flux
    const int N = n - 1;
    std::vector<double> diag(N), off(N - 1), mass(N);
    for (int i = 0; i < N; ++i) {
        double t = t0 + i * h;
        double r = std::exp(t);
        double q = mu * mu + eps * v(r) * r * r;
        if (i == 0) {
            diag[i] = 1.0 / h + gw + 0.5 * h * q;
            mass[i] = 0.5 * h * r * r;
        } else {
            diag[i] = 2.0 / h + h * q;
            mass[i] = h * r * r;
        }
        if (i + 1 < N) off[i] = -1.0 / h;
    }
    double vmax = 0.0;
    for (int i = 0; i < N; ++i)
        vmax = std::max(vmax, std::abs(v(std::exp(t0 + i * h))));
    double lo = -eps * vmax - 1.0, hi = -1e-12;
    if (detail::sturm_count(diag, off, mass, hi) == 0) return std::nullopt;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (detail::sturm_count(diag, off, mass, mid) >= 1)
            hi = mid;
        else
            lo = mid;
        if (hi - lo < 1e-13 * std::max(1.0, std::abs(hi))) break;
    }
    return 0.5 * (lo + hi);
}

/// Quadratic-form values of the cutoff trial states: the explicit integrals
///   (2 pi / n^2) int_n^{2n} r^{+-(2a-1)} |xi'(r/n)|^2 dr
/// for the standard smooth bump, with the fitted log-log slope.
struct CutoffDecay {
    std::vector<double> n;
    std::vector<double> value;
    double slope = 0.0;
};

namespace detail {

inline double bump_xi_prime(double s) {
    // xi = p(2-s) / (p(2-s) + p(s-1)), p(t) = e^{-1/t} for t > 0
    if (s <= 1.0 || s >= 2.0) return 0.0;
    auto p = [](double t) { return std::exp(-1.0 / t); };
    auto dp = [](double t) { return std::exp(-1.0 / t) / (t * t); };
    double A = p(2.0 - s), B = p(s - 1.0);
    double dA = -dp(2.0 - s), dB = dp(s - 1.0);
    double denom = (A + B) * (A + B);
    return (dA * B - A * dB) / denom;
}

}  // namespace detail

inline CutoffDecay cutoff_form_decay(const FluxAlpha& a, Spin spin,
                                     const std::vector<double>& n_list) {
    if (n_list.empty()) throw std::domain_error("cutoff_form_decay: empty list");
    CutoffDecay out;
    double expo = (spin == Spin::plus) ? 2.0 * a.alpha - 1.0
                                       : 1.0 - 2.0 * a.alpha;
    for (double n : n_list) {
        auto f = [&](double r) {
            double xp = detail::bump_xi_prime(r / n);
            return Complex(std::pow(r, expo) * xp * xp, 0.0);
        };
        double val = 2.0 * pi / (n * n) *
                     quad::adaptive_gk(f, {n, 1.25 * n, 1.5 * n, 1.75 * n, 2.0 * n},
                                       1e-15, 1e-11)
                         .real();
        out.n.push_back(n);
        out.value.push_back(val);
    }
    // least-squares slope of log(value) against log(n)
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t m = n_list.size();
    for (std::size_t i = 0; i < m; ++i) {
        double x = std::log(out.n[i]), y = std::log(out.value[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    out.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    return out;
}

}  // namespace abpauli::oracle

#endif
