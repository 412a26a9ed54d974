#ifndef ABPAULI_BSOLVER_HPP
#define ABPAULI_BSOLVER_HPP

// Birman-Schwinger machinery: polar product grids, Nystrom assembly of
// eps A (H - z)^{-1} B on the grid (full 2D route and per-channel radial
// route), Hilbert-Schmidt norms, and bound-state location as the root of
// (smallest eigenvalue) + 1 = 0 in z.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "abpauli/common.hpp"
#include "abpauli/greenfn.hpp"
#include "abpauli/potential.hpp"
#include "abpauli/quadrature.hpp"
#include "abpauli/specfun.hpp"

namespace abpauli::bsolver {

using greenfn::EvalParams;
using greenfn::FluxAlpha;
using greenfn::SpectralParameter;
using greenfn::Spin;
using potential::PotentialSpec;

/// Gauss-Legendre radial panels (split at disk edges) times a uniform
/// offset angular grid; combined 2D weights integrate area exactly. The
/// panel touching r = 0 is quadratically graded so the admitted r^{-mu}
/// endpoint behavior of the critical channels is resolved.
struct QuadGrid {
    std::vector<double> r, wr;          // radial nodes and dr-weights
    std::vector<double> r_lo, r_hi;     // radial cell bounds per node
    std::vector<double> theta;          // offset midpoints on (-pi, pi]
    double theta_weight = 0.0;
    double r_max = 0.0;

    static QuadGrid build(int n_r, int n_theta, double r_max,
                          const std::vector<double>& interior_edges = {}) {
        if (n_r < 4 || n_theta < 4 || !(r_max > 0.0))
            throw std::domain_error("QuadGrid: degenerate sizes");
        QuadGrid g;
        g.r_max = r_max;
        std::vector<double> bounds{0.0};
        for (double e : interior_edges)
            if (e > 1e-12 && e < r_max * (1.0 - 1e-12)) bounds.push_back(e);
        bounds.push_back(r_max);
        std::sort(bounds.begin(), bounds.end());
        bounds.erase(std::unique(bounds.begin(), bounds.end()), bounds.end());
        int panels = (int)bounds.size() - 1;
        int per = std::max(8, n_r / panels);
        for (int p = 0; p < panels; ++p) {
            int n = (p == 0) ? n_r - per * (panels - 1) : per;
            n = std::max(n, 8);
            const auto& gl = quad::gauss_legendre_cached(n);
            double a = bounds[p], b = bounds[p + 1];
            std::size_t first = g.r.size();
            if (p == 0) {
                // r = b t^3 on [0,1]: dr = 3 b t^2 dt
                for (int i = 0; i < n; ++i) {
                    double t = 0.5 * (gl.x[i] + 1.0);
                    g.r.push_back(b * t * t * t);
                    g.wr.push_back(gl.w[i] * 1.5 * b * t * t);
                }
            } else {
                for (int i = 0; i < n; ++i) {
                    g.r.push_back(0.5 * (b - a) * (gl.x[i] + 1.0) + a);
                    g.wr.push_back(0.5 * (b - a) * gl.w[i]);
                }
            }
            for (int i = 0; i < n; ++i) {
                std::size_t idx = first + i;
                double lo = (i == 0) ? a : 0.5 * (g.r[idx - 1] + g.r[idx]);
                double hi =
                    (i == n - 1) ? b : 0.5 * (g.r[idx] + g.r[idx + 1]);
                g.r_lo.push_back(lo);
                g.r_hi.push_back(hi);
            }
        }
        g.theta.resize(n_theta);
        for (int j = 0; j < n_theta; ++j)
            g.theta[j] = -pi + (j + 0.5) * 2.0 * pi / n_theta;
        g.theta_weight = 2.0 * pi / n_theta;
        return g;
    }

    static QuadGrid for_potential(const PotentialSpec& pot, int n_r,
                                  int n_theta, double r_max) {
        return build(n_r, n_theta, r_max, pot.edge_radii());
    }

    std::size_t n_r() const { return r.size(); }
    std::size_t n_theta() const { return theta.size(); }
    std::size_t size() const { return r.size() * theta.size(); }

    double weight2d(std::size_t a) const {
        return wr[a] * r[a] * theta_weight;
    }

    double area() const {
        double s = 0.0;
        for (std::size_t a = 0; a < r.size(); ++a)
            s += weight2d(a) * theta.size();
        return s;
    }
};

struct Kernel2D {
    Eigen::MatrixXcd plus, minus;
    double alpha = 0.0, eps = 0.0;
    Complex z{0.0, 0.0};

    const Eigen::MatrixXcd& block(Spin s) const {
        return s == Spin::plus ? plus : minus;
    }
    std::size_t full_dim() const { return plus.rows() + minus.rows(); }
};

inline double hs_norm(const Eigen::MatrixXcd& m) { return m.norm(); }

inline double hs_norm(const Kernel2D& k) {
    return std::hypot(k.plus.norm(), k.minus.norm());
}

namespace detail {

/// One-sided cell integral (1/norm) int_cell K_0(kappa |x_node - y|) dmu
/// with dmu = r dr dtheta, node inside the cell. Local polar coordinates
/// around the node, four corner sectors, measure correction to first order
/// in the cell curvature.
inline Complex k0_cell_node_average(Complex kappa, double r_node, double r_lo,
                                    double r_hi, double dtheta, double norm) {
    const double ul = r_lo - r_node, uh = r_hi - r_node;  // ul < 0 < uh
    const double vh = 0.5 * dtheta * r_node, vl = -vh;    // arc offsets
    const double cx[4] = {uh, ul, ul, uh}, cy[4] = {vh, vh, vl, vl};
    double ang[5];
    for (int c = 0; c < 4; ++c) ang[c] = std::atan2(cy[c], cx[c]);
    // order sector boundaries going counterclockwise from the first corner
    std::sort(ang, ang + 4);
    ang[4] = ang[0] + 2.0 * pi;
    const auto& glb = quad::gauss_legendre_cached(8);
    const auto& gls = quad::gauss_legendre_cached(10);
    Complex acc(0.0, 0.0);
    for (int sec = 0; sec < 4; ++sec) {
        double b0 = ang[sec], b1 = ang[sec + 1];
        if (b1 - b0 < 1e-14) continue;
        for (int ib = 0; ib < 8; ++ib) {
            double beta = 0.5 * (b1 - b0) * (glb.x[ib] + 1.0) + b0;
            double cb = std::cos(beta), sb = std::sin(beta);
            double S = 1e300;
            if (cb > 1e-14) S = std::min(S, uh / cb);
            if (cb < -1e-14) S = std::min(S, ul / cb);
            if (sb > 1e-14) S = std::min(S, vh / sb);
            if (sb < -1e-14) S = std::min(S, vl / sb);
            double wb = glb.w[ib] * 0.5 * (b1 - b0);
            const double cuts[4] = {0.0, S / 64, S / 8, S};
            for (int p = 0; p < 3; ++p) {
                for (int is = 0; is < 10; ++is) {
                    double s0 = cuts[p], s1 = cuts[p + 1];
                    double sd = 0.5 * (s1 - s0) * (gls.x[is] + 1.0) + s0;
                    Complex arg = kappa * sd;
                    Complex k0 = (arg.real() > 700.0)
                                     ? Complex(0.0, 0.0)
                                     : specfun::bessel_k(0.0, arg);
                    double meas = sd * (1.0 + sd * cb / r_node);
                    acc += wb * gls.w[is] * 0.5 * (s1 - s0) * k0 * meas;
                }
            }
        }
    }
    return acc / norm;
}

/// One (r, r0) pair, all angular offsets: shared Gauss panels in s evaluate
/// the K_0 factor once, each phi reuses it through the rational factor.
inline void s_integral_batch(const FluxAlpha& a, Complex kappa, double r,
                             double r0, const std::vector<double>& phis,
                             double phi_eps, std::vector<Complex>& out) {
    const double rk = kappa.real();
    const double geo = std::sqrt(r * r0);
    double S = 2.0 * std::log(50.0 / std::max(rk * geo, 1e-280)) + 4.0;
    S = std::clamp(S, 10.0, 1400.0);
    double delta = 0.5 * phi_eps;

    std::vector<double> bounds{0.0, delta};
    for (double b = 2.0 * delta; b < S; b *= 2.0) bounds.push_back(b);
    bounds.push_back(S);

    struct Node {
        double s, base;  // K0(kappa R(s)) e^{-alpha s} times the GL weight
    };
    static thread_local std::vector<Node> nodes;
    nodes.clear();
    const auto& gl = quad::gauss_legendre_cached(24);
    for (std::size_t p = 0; p + 1 < bounds.size(); ++p) {
        for (int sgn : {+1, -1}) {
            double lo = sgn > 0 ? bounds[p] : -bounds[p + 1];
            double hi = sgn > 0 ? bounds[p + 1] : -bounds[p];
            for (int i = 0; i < 24; ++i) {
                double s = 0.5 * (hi - lo) * (gl.x[i] + 1.0) + lo;
                double R = std::sqrt(r * r + r0 * r0 +
                                     2.0 * r * r0 * std::cosh(s));
                Complex w = kappa * R;
                double k0 = (w.real() > 700.0)
                                ? 0.0
                                : specfun::bessel_k(0.0, w).real();
                nodes.push_back(
                    {s, k0 * std::exp(-a.alpha * s) * 0.5 * (hi - lo) * gl.w[i]});
            }
        }
    }
    out.assign(phis.size(), Complex(0.0, 0.0));
    for (std::size_t q = 0; q < phis.size(); ++q) {
        double phi = phis[q];
        if (std::abs(phi - pi) < phi_eps) phi = pi - phi_eps;
        if (std::abs(phi + pi) < phi_eps) phi = -pi + phi_eps;
        const Complex eiphi = std::exp(Complex(0.0, phi));
        Complex acc(0.0, 0.0);
        for (const Node& n : nodes)
            acc += n.base / (1.0 + std::exp(-n.s) * eiphi);
        out[q] = acc * std::exp(Complex(0.0, a.alpha * phi)) / (2.0 * pi);
    }
}

}  // namespace detail

/// Friedrichs kernel tabulated on the grid: value(a, c, k) is the kernel at
/// radii (r_a, r_c) and angular offset k * (2 pi / n_theta), k >= 0; negative
/// offsets follow from hermitian symmetry at the real z this path uses.
/// On each ring (a == c) the slot k = 0 stores either the finite part of
/// the kernel after removing log(2 sin(phi/2)) (ring resolved: assembly
/// applies exact log quadrature weights) or the one-sided cell integral of
/// the head term (kernel concentrated below the angular spacing).
struct FriedrichsTable {
    std::size_t nr = 0, nth = 0;
    std::vector<Complex> data;
    std::vector<char> active;
    std::vector<char> ring_resolved;

    Complex at(std::size_t a, std::size_t c, std::size_t k) const {
        return data[(a * nr + c) * nth + k];
    }

    static FriedrichsTable build(const FluxAlpha& al,
                                 const SpectralParameter& sp,
                                 const QuadGrid& g,
                                 const std::vector<char>& active_mask,
                                 const EvalParams& p = {},
                                 unsigned threads = 0) {
        if (!(sp.z.imag() == 0.0 && sp.z.real() < 0.0))
            throw std::domain_error("FriedrichsTable: needs real z < 0");
        FriedrichsTable t;
        t.nr = g.n_r();
        t.nth = g.n_theta();
        t.active = active_mask;
        t.data.assign(t.nr * t.nr * t.nth, Complex(0.0, 0.0));
        t.ring_resolved.assign(t.nr, 0);
        for (std::size_t a = 0; a < t.nr; ++a)
            t.ring_resolved[a] =
                (sp.kappa.real() * g.r[a] * g.theta_weight <= 2.0);

        std::vector<double> phis(t.nth);
        for (std::size_t k = 0; k < t.nth; ++k) phis[k] = k * g.theta_weight;
        const double sina = std::sin(pi * al.alpha);

        std::vector<std::size_t> pairs;
        for (std::size_t a = 0; a < t.nr; ++a)
            for (std::size_t c = 0; c < t.nr; ++c)
                if (active_mask[a] && active_mask[c])
                    pairs.push_back(a * t.nr + c);

        parallel_for(pairs.size(), threads, [&](std::size_t idx) {
            std::size_t a = pairs[idx] / t.nr, c = pairs[idx] % t.nr;
            std::vector<Complex> tails;
            detail::s_integral_batch(al, sp.kappa, g.r[a], g.r[c], phis,
                                     p.phi_eps, tails);
            for (std::size_t k = 0; k < t.nth; ++k) {
                double phi = phis[k];
                if (std::abs(phi - pi) < p.phi_eps) phi = pi - p.phi_eps;
                Complex head;
                if (a == c && k == 0) {
                    if (t.ring_resolved[a]) {
                        // finite part at phi -> 0 once log(2 sin(phi/2))
                        // times f = -I_0 is removed from the K_0 head
                        head = greenfn::c_hat(0.0, al) *
                               (-std::log(sp.kappa * g.r[a]) +
                                std::log(2.0) - euler_gamma);
                    } else {
                        head = greenfn::c_hat(0.0, al) *
                               detail::k0_cell_node_average(
                                   sp.kappa, g.r[a], g.r_lo[a], g.r_hi[a],
                                   g.theta_weight, g.weight2d(a));
                    }
                } else {
                    double d2 = g.r[a] * g.r[a] + g.r[c] * g.r[c] -
                                2.0 * g.r[a] * g.r[c] * std::cos(phi);
                    head = greenfn::c_hat(phi, al) *
                           specfun::bessel_k(0.0, sp.kappa * std::sqrt(d2));
                }
                t.data[(a * t.nr + c) * t.nth + k] =
                    head - (sina / pi) * tails[k];
            }
        });
        return t;
    }
};

namespace detail {

struct SpinData {
    std::vector<double> a;   // |v|^{1/2} at radial nodes
    std::vector<Complex> b;  // phase factor times |v|^{1/2}
    std::vector<Complex> kv; // K_nu(kappa r) at radial nodes
    bool any = false;
};

inline SpinData spin_data(const FluxAlpha& al, const SpectralParameter& sp,
                          const PotentialSpec& pot, const QuadGrid& g,
                          Spin s) {
    SpinData d;
    auto fp = potential::polar_factors(pot);
    double nu = greenfn::nu_of(al, s);
    d.a.resize(g.n_r());
    d.b.resize(g.n_r());
    d.kv.resize(g.n_r());
    for (std::size_t i = 0; i < g.n_r(); ++i) {
        Complex v = (s == Spin::plus) ? pot.v11_at(g.r[i]) : pot.v22_at(g.r[i]);
        d.a[i] = potential::FactorPair::a_of(v);
        d.b[i] = potential::FactorPair::b_of(v);
        if (d.a[i] != 0.0) d.any = true;
        Complex w = sp.kappa * g.r[i];
        d.kv[i] = (w.real() > 700.0) ? Complex(0.0, 0.0)
                                     : specfun::bessel_k(nu, w);
    }
    return d;
}

// Exact quadrature weights for the periodic log kernel: with nodes
// phi_k = 2 pi k / n, sum_k lam[k] e^{-iq phi_k} (2 pi / n) reproduces the
// Fourier coefficients of log(2 sin(phi/2)) for every resolved frequency q.
inline std::vector<double> kress_log_weights(std::size_t n) {
    std::vector<double> lam(n, 0.0);
    std::size_t qmax = (n % 2 == 0) ? n / 2 - 1 : (n - 1) / 2;
    for (std::size_t k = 0; k < n; ++k) {
        double acc = 0.0;
        for (std::size_t q = 1; q <= qmax; ++q)
            acc -= std::cos(q * k * 2.0 * pi / n) / (double)q;
        if (n % 2 == 0) acc -= std::cos(pi * (double)k) / (double)n;
        lam[k] = acc;
    }
    return lam;
}

// Assemble one spin block: weights, factors and the kernel
//   gauge(phi) T(a,c,|k|) + coef * K_nu(kr_a) K_nu(kr_c) * phase(phi)
// where coef/phase differ between the full and the regular-part kernels.
template <typename RankOne>
inline Eigen::MatrixXcd assemble_block(const FluxAlpha& al,
                                       const SpectralParameter& sp,
                                       double scale, const QuadGrid& g,
                                       const FriedrichsTable& t,
                                       const SpinData& sd, Spin s,
                                       const RankOne& rank1) {
    const std::size_t nr = g.n_r(), nth = g.n_theta();
    const std::size_t N = nr * nth;
    Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(N, N);
    if (!sd.any) return M;

    // angular factors per offset k (0..nth-1), both signs
    std::vector<Complex> gauge_pos(nth), gauge_neg(nth), ph_pos(nth),
        ph_neg(nth);
    for (std::size_t k = 0; k < nth; ++k) {
        double phi = k * g.theta_weight;
        gauge_pos[k] = std::exp(Complex(0.0, -al.alpha * phi));
        gauge_neg[k] = std::conj(gauge_pos[k]);
        Complex p = (s == Spin::plus) ? std::exp(Complex(0.0, -phi))
                                      : Complex(1.0, 0.0);
        ph_pos[k] = p;
        ph_neg[k] = std::conj(p);
    }
    std::vector<double> sqw(nr);
    for (std::size_t a = 0; a < nr; ++a) sqw[a] = std::sqrt(g.weight2d(a));

    const std::vector<double> lam = kress_log_weights(nth);
    const double kap = sp.kappa.real();

    parallel_for(nr, 0, [&](std::size_t a) {
        if (sd.a[a] == 0.0) return;
        std::vector<Complex> ring(nth);
        for (std::size_t c = 0; c < nr; ++c) {
            if (std::abs(sd.b[c]) == 0.0) continue;
            Complex r1 = rank1(sd.kv[a], sd.kv[c], g.r[a], g.r[c]);
            double pref = scale * sqw[a] * sd.a[a] * sqw[c];
            if (c == a) {
                // the assembled spin kernel is smooth on the ring except a
                // log point at zero offset: apply exact log weights there
                for (std::size_t k = 0; k < nth; ++k) {
                    Complex val = (k == 0)
                                      ? t.at(a, a, 0) + r1 * ph_pos[0]
                                      : gauge_pos[k] * t.at(a, a, k) +
                                            r1 * ph_pos[k];
                    if (!t.ring_resolved[a]) {
                        ring[k] = val;
                        continue;
                    }
                    double phi = k * g.theta_weight;
                    double sn = std::sin(0.5 * phi);
                    double w = 2.0 * kap * g.r[a] * sn;
                    Complex ftil(0.0, 0.0);
                    if (w <= 100.0) {
                        double sig = std::exp(-std::pow(w / 25.0, 12.0));
                        ftil = -(0.5 / pi) * sig *
                               specfun::bessel_i(0.0, Complex(w, 0.0)) *
                               std::exp(Complex(0.0,
                                                -al.alpha * std::sin(phi)));
                    }
                    Complex h = (k == 0)
                                    ? val
                                    : val - std::log(2.0 * sn) * ftil;
                    ring[k] = h + ftil * lam[k];
                }
                for (std::size_t k = 1; 2 * k <= nth; ++k) {
                    Complex avg = 0.5 * (ring[k] +
                                         std::conj(ring[nth - k]));
                    ring[k] = avg;
                    ring[nth - k] = std::conj(avg);
                }
                ring[0] = Complex(ring[0].real(), 0.0);
                for (std::size_t bth = 0; bth < nth; ++bth)
                    for (std::size_t dth = 0; dth < nth; ++dth)
                        M(a * nth + bth, a * nth + dth) =
                            pref * ring[(bth - dth + nth) % nth] * sd.b[a];
                continue;
            }
            for (std::size_t bth = 0; bth < nth; ++bth) {
                for (std::size_t dth = 0; dth < nth; ++dth) {
                    long k = (long)bth - (long)dth;
                    Complex tval, gaug, phs;
                    if (k >= 0) {
                        tval = t.at(a, c, (std::size_t)k);
                        gaug = gauge_pos[k];
                        phs = ph_pos[k];
                    } else {
                        tval = std::conj(t.at(c, a, (std::size_t)(-k)));
                        gaug = gauge_neg[-k];
                        phs = ph_neg[-k];
                    }
                    Complex ker = gaug * tval + r1 * phs;
                    M(a * nth + bth, c * nth + dth) =
                        pref * ker * sd.b[c];
                }
            }
        }
    });
    // Radial |r - r'| kink of every angular channel (Wronskian jump
    // -1/(2r)): restore its quadrature moment on the diagonal. The
    // per-frequency correction is q-independent, hence diagonal in angle.
    for (std::size_t a = 0; a < nr; ++a) {
        if (sd.a[a] == 0.0 || std::abs(sd.b[a]) == 0.0) continue;
        double ri = g.r[a];
        double exact =
            0.5 * (ri * ri + (g.r_max - ri) * (g.r_max - ri));
        double disc = 0.0;
        for (std::size_t j = 0; j < nr; ++j)
            disc += g.wr[j] * std::abs(ri - g.r[j]);
        Complex corr =
            scale * sd.a[a] * sd.b[a] * (-0.5) * (exact - disc);
        for (std::size_t bth = 0; bth < nth; ++bth)
            M(a * nth + bth, a * nth + bth) += corr;
    }
    return M;
}

}  // namespace detail

/// Full 2D Birman-Schwinger matrix eps A (H - z)^{-1} B on the grid, one
/// block per spin (exactly block diagonal for diagonal V). Restricted to
/// real z < 0; coincident-node entries use the log-split cell average.
inline Kernel2D assemble_bs_2d(const FluxAlpha& al, const SpectralParameter& sp,
                               double eps, const PotentialSpec& pot,
                               const QuadGrid& g, const EvalParams& p = {},
                               unsigned threads = 0) {
    if (!(sp.z.imag() == 0.0 && sp.z.real() < 0.0))
        throw std::domain_error("assemble_bs_2d: needs real z < 0");
    Kernel2D out;
    out.alpha = al.alpha;
    out.eps = eps;
    out.z = sp.z;
    auto sd_p = detail::spin_data(al, sp, pot, g, Spin::plus);
    auto sd_m = detail::spin_data(al, sp, pot, g, Spin::minus);
    std::vector<char> mask(g.n_r());
    for (std::size_t i = 0; i < g.n_r(); ++i)
        mask[i] = (sd_p.a[i] != 0.0 || sd_m.a[i] != 0.0);
    auto table = FriedrichsTable::build(al, sp, g, mask, p, threads);
    const double coef = std::sin(pi * al.alpha) / (pi * pi);
    auto rank1 = [coef](Complex ka, Complex kc, double, double) {
        return coef * ka * kc;
    };
    out.plus = detail::assemble_block(al, sp, eps, g, table, sd_p, Spin::plus,
                                      rank1);
    out.minus = detail::assemble_block(al, sp, eps, g, table, sd_m,
                                       Spin::minus, rank1);
    return out;
}

/// Regular-part operator Q_z = A G^reg B on the grid (no eps); the leading
/// power-law kernel is subtracted from the rank-one Bessel product.
inline Kernel2D assemble_q_2d(const FluxAlpha& al, const SpectralParameter& sp,
                              const PotentialSpec& pot, const QuadGrid& g,
                              const EvalParams& p = {}, unsigned threads = 0) {
    if (!(sp.z.imag() == 0.0 && sp.z.real() < 0.0))
        throw std::domain_error("assemble_q_2d: needs real z < 0");
    Kernel2D out;
    out.alpha = al.alpha;
    out.eps = 0.0;
    out.z = sp.z;
    auto sd_p = detail::spin_data(al, sp, pot, g, Spin::plus);
    auto sd_m = detail::spin_data(al, sp, pot, g, Spin::minus);
    std::vector<char> mask(g.n_r());
    for (std::size_t i = 0; i < g.n_r(); ++i)
        mask[i] = (sd_p.a[i] != 0.0 || sd_m.a[i] != 0.0);
    auto table = FriedrichsTable::build(al, sp, g, mask, p, threads);
    auto mk_rank1 = [&](Spin s) {
        double nu = greenfn::nu_of(al, s);
        double gnu = specfun::gamma_real(nu);
        double ca = al.c_alpha;
        Complex z = sp.z;
        return [nu, gnu, ca, z](Complex ka, Complex kc, double ra,
                                double rc) {
            Complex pw = std::exp(-nu * std::log(-z * ra * rc / 4.0));
            return ca * (4.0 * ka * kc - gnu * gnu * pw);
        };
    };
    out.plus = detail::assemble_block(al, sp, 1.0, g, table, sd_p, Spin::plus,
                                      mk_rank1(Spin::plus));
    out.minus = detail::assemble_block(al, sp, 1.0, g, table, sd_m,
                                       Spin::minus, mk_rank1(Spin::minus));
    return out;
}

/// Radial channel matrix: kernel I_mu(k r_<) K_nu(k r_>) with the critical
/// channels (minus, m=0) and (plus, m=-1) carrying the negative I order.
inline Eigen::MatrixXcd assemble_bs_radial_channel(
    const FluxAlpha& al, const SpectralParameter& sp, double eps,
    const PotentialSpec& pot, int m, Spin s, const QuadGrid& g) {
    if (!(sp.z.imag() == 0.0 && sp.z.real() < 0.0))
        throw std::domain_error("assemble_bs_radial_channel: needs real z < 0");
    const std::size_t nr = g.n_r();
    Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(nr, nr);

    double nuk = std::abs(m + al.alpha);
    double mui = nuk;
    if (s == Spin::minus && m == 0) mui = -al.alpha;
    if (s == Spin::plus && m == -1) mui = -(1.0 - al.alpha);

    const Complex kap = sp.kappa;
    std::vector<ScaledC> iv(nr), kv(nr);
    bool any = false;
    std::vector<double> av(nr);
    std::vector<Complex> bv(nr);
    for (std::size_t i = 0; i < nr; ++i) {
        Complex v = (s == Spin::plus) ? pot.v11_at(g.r[i]) : pot.v22_at(g.r[i]);
        av[i] = potential::FactorPair::a_of(v);
        bv[i] = potential::FactorPair::b_of(v);
        any = any || av[i] != 0.0;
    }
    if (!any) return M;
    for (std::size_t i = 0; i < nr; ++i) {
        Complex w = kap * g.r[i];
        iv[i] = specfun::bessel_i_scaled(mui, w);
        kv[i] = specfun::bessel_k_scaled(nuk, w);
    }
    for (std::size_t i = 0; i < nr; ++i) {
        if (av[i] == 0.0) continue;
        double swi = std::sqrt(g.r[i] * g.wr[i]);
        for (std::size_t j = 0; j < nr; ++j) {
            if (std::abs(bv[j]) == 0.0) continue;
            std::size_t lo = (g.r[i] <= g.r[j]) ? i : j;
            std::size_t hi = (lo == i) ? j : i;
            Complex ker = (iv[lo] * kv[hi]).value();
            double swj = std::sqrt(g.r[j] * g.wr[j]);
            M(i, j) = eps * swi * av[i] * ker * bv[j] * swj;
        }
    }
    // The kernel has the kink I K + (-1/(2r)) |r - r'| + smooth across the
    // diagonal (Wronskian jump); restore the quadrature moment of |r - r'|
    // exactly through a diagonal correction.
    for (std::size_t i = 0; i < nr; ++i) {
        if (av[i] == 0.0 || std::abs(bv[i]) == 0.0) continue;
        double ri = g.r[i];
        double exact = 0.5 * (ri * ri + (g.r_max - ri) * (g.r_max - ri));
        double disc = 0.0;
        for (std::size_t j = 0; j < nr; ++j)
            disc += g.wr[j] * std::abs(ri - g.r[j]);
        M(i, i) += eps * av[i] * bv[i] * (-0.5) * (exact - disc);
    }
    return M;
}

/// Eigenvalues of a kernel block, self-adjoint fast path when applicable.
inline std::vector<Complex> spectrum(const Eigen::MatrixXcd& m) {
    std::vector<Complex> ev;
    if (m.rows() == 0) return ev;
    double scale = m.norm();
    if (scale == 0.0) {
        ev.assign(m.rows(), Complex(0.0, 0.0));
        return ev;
    }
    if ((m - m.adjoint()).norm() <= 1e-12 * scale) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m);
        for (int i = 0; i < es.eigenvalues().size(); ++i)
            ev.emplace_back(es.eigenvalues()[i], 0.0);
    } else {
        Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(m);
        for (int i = 0; i < es.eigenvalues().size(); ++i)
            ev.push_back(es.eigenvalues()[i]);
    }
    std::sort(ev.begin(), ev.end(), [](Complex a, Complex b) {
        return a.real() < b.real();
    });
    return ev;
}

enum class SearchPath { channels, grid2d };

struct BsOptions {
    int m_max = 12;
    double rel_tol = 1e-10;
    int max_iter = 200;
    EvalParams eval;
    unsigned threads = 0;
};

namespace detail {

inline bool potential_is_real(const PotentialSpec& pot) {
    for (const auto* comp : {&pot.v11, &pot.v22})
        for (const auto& t : *comp)
            if (t.amplitude.imag() != 0.0) return false;
    return true;
}

}  // namespace detail

/// Smallest (most negative) eigenvalue of the selected spin block at z.
inline double bs_min_eigenvalue(const FluxAlpha& al, double z, double eps,
                                const PotentialSpec& pot, Spin spin,
                                SearchPath path, const QuadGrid& g,
                                const BsOptions& opt = {},
                                std::vector<int>* keep_channels = nullptr) {
    SpectralParameter sp{Complex(z, 0.0)};
    double mu = 0.0;
    if (path == SearchPath::grid2d) {
        auto K = assemble_bs_2d(al, sp, eps, pot, g, opt.eval, opt.threads);
        for (Complex e : spectrum(K.block(spin))) mu = std::min(mu, e.real());
        return mu;
    }
    std::vector<int> ms;
    if (keep_channels && !keep_channels->empty()) {
        ms = *keep_channels;
    } else {
        for (int m = -opt.m_max; m <= opt.m_max; ++m) ms.push_back(m);
    }
    std::vector<int> kept;
    for (int m : ms) {
        auto M = assemble_bs_radial_channel(al, sp, eps, pot, m, spin, g);
        double mmin = 0.0;
        for (Complex e : spectrum(M)) mmin = std::min(mmin, e.real());
        mu = std::min(mu, mmin);
        if (keep_channels && mmin < -0.4) kept.push_back(m);
    }
    if (keep_channels && keep_channels->empty()) {
        // always retain the critical channel of the spin
        int crit = (spin == Spin::minus) ? 0 : -1;
        if (std::find(kept.begin(), kept.end(), crit) == kept.end())
            kept.push_back(crit);
        *keep_channels = kept;
    }
    return mu;
}

/// Root of mu_min(z) + 1 = 0 in the bracket (log-z bisection plus secant
/// polish); std::nullopt when mu stays above -1 on the whole bracket.
inline std::optional<double> find_bound_state(
    const FluxAlpha& al, double eps, const PotentialSpec& pot,
    std::pair<double, double> bracket, SearchPath path, Spin spin,
    const QuadGrid& g, const BsOptions& opt = {}) {
    auto [zlo, zhi] = bracket;
    if (!(zlo < zhi && zhi < 0.0))
        throw std::domain_error("find_bound_state: bracket must lie in (-inf,0)");
    if (!detail::potential_is_real(pot))
        throw std::invalid_argument(
            "find_bound_state: complex potentials take the implicit-equation "
            "path");

    std::vector<int> keep;  // filled on the first (least negative) eigensolve
    auto gfun = [&](double z) {
        return bs_min_eigenvalue(al, z, eps, pot, spin, path, g, opt, &keep) +
               1.0;
    };
    double ghi = gfun(zhi);
    if (ghi >= 0.0) return std::nullopt;  // mu stays in (-1, 0]
    double glo = gfun(zlo);
    if (glo <= 0.0)
        throw numeric_error("find_bound_state: bracket does not enclose the root");

    double tlo = std::log(-zlo), thi = std::log(-zhi);  // note tlo > thi
    double flo = glo, fhi = ghi;
    double t = 0.5 * (tlo + thi);
    for (int it = 0; it < opt.max_iter; ++it) {
        t = 0.5 * (tlo + thi);
        double f = gfun(-std::exp(t));
        if (f > 0.0) {
            tlo = t;
            flo = f;
        } else {
            thi = t;
            fhi = f;
        }
        if (std::abs(tlo - thi) < 1e-3) break;
    }
    // secant in log z
    double t0 = tlo, t1 = thi, f0 = flo, f1 = fhi;
    for (int it = 0; it < 60; ++it) {
        if (f1 == f0) break;
        double t2 = t1 - f1 * (t1 - t0) / (f1 - f0);
        t2 = std::clamp(t2, std::min(tlo, thi), std::max(tlo, thi));
        double f2 = gfun(-std::exp(t2));
        t0 = t1;
        f0 = f1;
        t1 = t2;
        f1 = f2;
        if (std::abs(t1 - t0) < opt.rel_tol) break;
    }
    return -std::exp(t1);
}

}  // namespace abpauli::bsolver

#endif
