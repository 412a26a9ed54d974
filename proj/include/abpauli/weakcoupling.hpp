#ifndef ABPAULI_WEAKCOUPLING_HPP
#define ABPAULI_WEAKCOUPLING_HPP

// Weak-coupling machinery: the diagonal weight matrix D(w), the coupling
// matrices U and W(eps) = U + U_1(eps), roots of the implicit eigenvalue
// equation, and the closed-form leading asymptotics of the two emerging
// eigenvalues.

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <vector>

#include "abpauli/bsolver.hpp"
#include "abpauli/common.hpp"
#include "abpauli/greenfn.hpp"
#include "abpauli/potential.hpp"
#include "abpauli/quadrature.hpp"

namespace abpauli::weakcoupling {

using bsolver::Kernel2D;
using bsolver::QuadGrid;
using greenfn::EvalParams;
using greenfn::FluxAlpha;
using greenfn::PolarPoint;
using greenfn::SpectralParameter;
using potential::PotentialSpec;

/// Diagonal 2x2 weight sqrt(C_alpha) diag(Gamma(1-a)(|w|/2)^{a-1} e^{i ph},
/// Gamma(a)(|w|/2)^{-a}).
struct DMatrix {
    Complex d11, d22;
};

inline DMatrix d_matrix(const FluxAlpha& a, const PolarPoint& w) {
    if (!(w.r > 0.0)) throw std::domain_error("d_matrix: requires |w| > 0");
    double sc = std::sqrt(a.c_alpha);
    double g1 = specfun::gamma_real(1.0 - a.alpha);
    double g2 = specfun::gamma_real(a.alpha);
    Complex phase = std::exp(Complex(0.0, w.theta));
    return {sc * g1 * std::pow(0.5 * w.r, a.alpha - 1.0) * phase,
            Complex(sc * g2 * std::pow(0.5 * w.r, -a.alpha), 0.0)};
}

/// U and (optionally) W(eps) for a diagonal potential; off-diagonal entries
/// vanish identically, so the implicit-equation coefficients reduce to
/// a = W_11, b = W_22, c = a b.
struct CouplingMatrix {
    Complex u11{0.0, 0.0}, u22{0.0, 0.0};
    Complex w11{0.0, 0.0}, w22{0.0, 0.0};
    bool has_w = false;

    Complex a() const { return has_w ? w11 : u11; }
    Complex b() const { return has_w ? w22 : u22; }
    Complex c() const { return a() * b(); }
};

/// U_11 = C_a Gamma(1-a)^2 int v11 (|w|/2)^{2(a-1)} dw and the mirrored
/// U_22, by adaptive radial quadrature (angular phases cancel).
inline CouplingMatrix compute_U(const FluxAlpha& a, const PotentialSpec& pot) {
    CouplingMatrix u;
    if (pot.empty()) return u;
    double R = pot.support_radius();
    std::vector<double> breaks{0.0};
    for (double e : pot.edge_radii())
        if (e < R) breaks.push_back(e);
    breaks.push_back(R);

    auto radial = [&](auto component, double expo) {
        auto f = [&](double r) {
            return component(r) * std::pow(0.5 * r, expo) * r;
        };
        Complex val = quad::adaptive_gk(f, breaks, 1e-14, 1e-10, 3000);
        if (!std::isfinite(std::abs(val)))
            throw numeric_error("compute_U: divergent moment");
        return 2.0 * pi * val;
    };
    double g1 = specfun::gamma_real(1.0 - a.alpha);
    double g2 = specfun::gamma_real(a.alpha);
    if (!pot.v11.empty())
        u.u11 = a.c_alpha * g1 * g1 *
                radial([&](double r) { return pot.v11_at(r); },
                       2.0 * (a.alpha - 1.0));
    if (!pot.v22.empty())
        u.u22 = a.c_alpha * g2 * g2 *
                radial([&](double r) { return pot.v22_at(r); },
                       -2.0 * a.alpha);
    return u;
}

/// W(eps) = U + U_1(eps) with U_1 computed by applying the discretized
/// (1 + eps Q_z)^{-1} to the grid-sampled columns of A conj(D) and
/// integrating against D B.
inline CouplingMatrix compute_W(const FluxAlpha& a, double eps, double z,
                                const PotentialSpec& pot, const QuadGrid& g,
                                const EvalParams& p = {},
                                unsigned threads = 0) {
    if (!(z < 0.0)) throw std::domain_error("compute_W: needs z < 0");
    CouplingMatrix w = compute_U(a, pot);
    w.w11 = w.u11;
    w.w22 = w.u22;
    w.has_w = true;
    if (eps == 0.0 || pot.empty()) return w;

    SpectralParameter sp{Complex(z, 0.0)};
    Kernel2D Q = bsolver::assemble_q_2d(a, sp, pot, g, p, threads);
    double qn = bsolver::hs_norm(Q);
    if (eps * qn >= 1.0)
        throw numeric_error("compute_W: eps * |Q_z|_HS >= 1, Neumann series invalid");

    auto fp = potential::polar_factors(pot);
    const std::size_t nr = g.n_r(), nth = g.n_theta(), N = nr * nth;

    auto correction = [&](greenfn::Spin s) -> Complex {
        const Eigen::MatrixXcd& Qb = Q.block(s);
        Eigen::VectorXcd ucol(N), left(N);
        for (std::size_t a_i = 0; a_i < nr; ++a_i) {
            double r = g.r[a_i];
            double av = (s == greenfn::Spin::plus) ? fp.a11(r) : fp.a22(r);
            Complex bv = (s == greenfn::Spin::plus) ? fp.b11(r) : fp.b22(r);
            for (std::size_t b_i = 0; b_i < nth; ++b_i) {
                DMatrix d = d_matrix(a, {r, g.theta[b_i]});
                Complex dv = (s == greenfn::Spin::plus) ? d.d11 : d.d22;
                double sw = std::sqrt(g.weight2d(a_i));
                ucol[a_i * nth + b_i] = sw * av * std::conj(dv);
                left[a_i * nth + b_i] = sw * dv * bv;
            }
        }
        // y = [(1 + eps Q)^{-1} - 1] u = -(1 + eps Q)^{-1} (eps Q u)
        Eigen::VectorXcd rhs = -eps * (Qb * ucol);
        Eigen::MatrixXcd A =
            Eigen::MatrixXcd::Identity(N, N) + eps * Qb;
        Eigen::VectorXcd y = A.partialPivLu().solve(rhs);
        return left.transpose() * y;
    };
    if (!pot.v11.empty()) w.w11 += correction(greenfn::Spin::plus);
    if (!pot.v22.empty()) w.w22 += correction(greenfn::Spin::minus);
    return w;
}

struct ImplicitRoot {
    Complex z;
    bool admissible;  // branch constraint ph((-z)^{...}) satisfied
    int branch;       // +1: a-side, -1: b-side, 0: general Newton
};

namespace detail {

inline Complex eq_residual(double alpha, double eps, Complex a, Complex b,
                           Complex c, Complex zeta) {
    Complex la = std::log(zeta);
    return eps * eps * c * std::exp(-la) + eps * a * std::exp((alpha - 1.0) * la) +
           eps * b * std::exp(-alpha * la) + 1.0;
}

inline Complex eq_derivative(double alpha, double eps, Complex a, Complex b,
                             Complex c, Complex zeta) {
    Complex la = std::log(zeta);
    return -eps * eps * c * std::exp(-2.0 * la) +
           eps * a * (alpha - 1.0) * std::exp((alpha - 2.0) * la) -
           eps * b * alpha * std::exp(-(alpha + 1.0) * la);
}

}  // namespace detail

/// Roots z of eps^2 c (-z)^{-1} + eps(a (-z)^{a-1} + b (-z)^{-a}) + 1 = 0.
/// Diagonal data factorizes into the two branch equations; general (a,b,c)
/// runs Newton in zeta = -z from the factorized initial guesses. Roots
/// whose branch constraint fails are returned flagged inadmissible.
inline std::vector<ImplicitRoot> implicit_roots(const FluxAlpha& al,
                                                double eps, Complex a,
                                                Complex b, Complex c) {
    if (!(eps > 0.0)) throw std::domain_error("implicit_roots: eps <= 0");
    std::vector<ImplicitRoot> out;
    const double alpha = al.alpha;
    bool diagonal = std::abs(c - a * b) <=
                    1e-12 * (std::abs(c) + std::abs(a * b) + 1e-300);

    auto branch_root = [&](Complex coef, double expo, int tag) {
        if (coef == Complex(0.0, 0.0)) return;
        Complex base = -eps * coef;  // (-z)^{expo} = base
        bool adm = std::abs(std::arg(base)) < expo * pi;
        Complex zeta = std::exp(std::log(base) / expo);
        out.push_back({-zeta, adm, tag});
    };

    if (diagonal) {
        branch_root(a, 1.0 - alpha, +1);
        branch_root(b, alpha, -1);
        return out;
    }

    // general coefficients: Newton from the factorized guesses
    std::vector<Complex> guesses;
    if (a != Complex(0, 0))
        guesses.push_back(std::exp(std::log(-eps * a) / (1.0 - alpha)));
    if (b != Complex(0, 0))
        guesses.push_back(std::exp(std::log(-eps * b) / alpha));
    for (Complex zeta : guesses) {
        bool ok = false;
        for (int it = 0; it < 50; ++it) {
            Complex f = detail::eq_residual(alpha, eps, a, b, c, zeta);
            if (std::abs(f) <= 1e-12) {
                ok = true;
                break;
            }
            Complex df = detail::eq_derivative(alpha, eps, a, b, c, zeta);
            if (df == Complex(0.0, 0.0)) break;
            Complex step = f / df;
            if (!(std::isfinite(step.real()) && std::isfinite(step.imag())))
                break;
            zeta -= step;
        }
        if (!ok) continue;  // diverged: dropped with no entry
        bool adm = std::abs(std::arg(zeta)) < pi * (1.0 - 1e-15);
        bool dup = false;
        for (const auto& r : out)
            if (std::abs(-zeta - r.z) <=
                1e-8 * (std::abs(zeta) + std::abs(r.z)))
                dup = true;
        if (!dup) out.push_back({-zeta, adm, 0});
    }
    return out;
}

struct AsymptoticPair {
    std::optional<Complex> z_plus, z_minus;
    bool plus_admissible = false, minus_admissible = false;
};

/// Leading-order eigenvalues z_+ = -(-eps a0)^{1/(1-alpha)} and
/// z_- = -(-eps b0)^{1/alpha} with their phase-condition flags; components
/// are absent when the corresponding potential entry vanishes.
inline AsymptoticPair asymptotic_eigenvalues(const FluxAlpha& al, double eps,
                                             const CouplingMatrix& u) {
    AsymptoticPair out;
    const double alpha = al.alpha;
    if (u.u11 != Complex(0.0, 0.0)) {
        Complex base = -eps * u.u11;
        out.plus_admissible =
            eps == 0.0 || std::abs(std::arg(base)) < (1.0 - alpha) * pi;
        out.z_plus = (eps == 0.0)
                         ? Complex(0.0, 0.0)
                         : -std::exp(std::log(base) / (1.0 - alpha));
    }
    if (u.u22 != Complex(0.0, 0.0)) {
        Complex base = -eps * u.u22;
        out.minus_admissible =
            eps == 0.0 || std::abs(std::arg(base)) < alpha * pi;
        out.z_minus = (eps == 0.0)
                          ? Complex(0.0, 0.0)
                          : -std::exp(std::log(base) / alpha);
    }
    return out;
}

}  // namespace abpauli::weakcoupling

#endif
