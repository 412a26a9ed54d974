#ifndef ABPAULI_POTENTIAL_HPP
#define ABPAULI_POTENTIAL_HPP

// Diagonal 2x2 electric perturbations V = diag(v11, v22) built from radial
// profile terms, their pointwise polar factors V = B A, and the weighted
// moments that certify the integrability hypotheses.

#include <cmath>
#include <string>
#include <vector>

#include "abpauli/common.hpp"
#include "abpauli/quadrature.hpp"

namespace abpauli::potential {

enum class Shape { gaussian, annular_gaussian, disk };

struct Term {
    Shape shape = Shape::gaussian;
    Complex amplitude{-1.0, 0.0};
    double width = 1.0;          // gaussian width / disk radius
    double center_radius = 0.0;  // annular-gaussian only

    double profile(double r) const {
        switch (shape) {
            case Shape::gaussian: {
                double t = r / width;
                return std::exp(-t * t);
            }
            case Shape::annular_gaussian: {
                double t = (r - center_radius) / width;
                return std::exp(-t * t);
            }
            case Shape::disk:
                return r <= width ? 1.0 : 0.0;
        }
        return 0.0;
    }

    double support_radius() const {
        switch (shape) {
            case Shape::gaussian:
                return 6.5 * width;
            case Shape::annular_gaussian:
                return center_radius + 6.5 * width;
            case Shape::disk:
                return width;
        }
        return width;
    }
};

struct Moments {
    double m_plus = 0.0;   // int |V| |x|^{2 nu} dx
    double m_minus = 0.0;  // int |V| |x|^{-2 nu} dx
    double l1 = 0.0;       // int |V| dx
    double l2 = 0.0;       // int |V|^2 dx  (the 1+delta check at delta = 1)
    bool finite = false;
};

struct PotentialSpec {
    std::vector<Term> v11, v22;

    Complex v11_at(double r) const { return component_at(v11, r); }
    Complex v22_at(double r) const { return component_at(v22, r); }

    bool empty() const { return v11.empty() && v22.empty(); }

    /// Operator norm of the diagonal matrix V(x).
    double abs_at(double r) const {
        return std::max(std::abs(v11_at(r)), std::abs(v22_at(r)));
    }

    double support_radius() const {
        double R = 0.0;
        for (const auto& t : v11) R = std::max(R, t.support_radius());
        for (const auto& t : v22) R = std::max(R, t.support_radius());
        return R;
    }

    /// Radii where some term is discontinuous (disk edges), ascending.
    std::vector<double> edge_radii() const {
        std::vector<double> e;
        for (const auto* comp : {&v11, &v22})
            for (const auto& t : *comp)
                if (t.shape == Shape::disk) e.push_back(t.width);
        std::sort(e.begin(), e.end());
        e.erase(std::unique(e.begin(), e.end()), e.end());
        return e;
    }

    /// Weighted moments for nu = max(alpha, 1-alpha); all supported shapes
    /// keep them finite, the values are recorded as run metadata.
    Moments moments(double alpha) const {
        double nu = std::max(alpha, 1.0 - alpha);
        Moments m;
        if (empty()) {
            m.finite = true;
            return m;
        }
        double R = support_radius();
        std::vector<double> breaks{0.0};
        for (double e : edge_radii())
            if (e < R) breaks.push_back(e);
        breaks.push_back(R);
        auto integ = [&](auto weight) {
            auto f = [&](double r) {
                return Complex(abs_at(r) * weight(r) * r, 0.0);
            };
            return 2.0 * pi *
                   quad::adaptive_gk(f, breaks, 1e-12, 1e-10, 2000).real();
        };
        m.m_plus = integ([nu](double r) { return std::pow(r, 2.0 * nu); });
        m.m_minus = integ([nu](double r) { return std::pow(r, -2.0 * nu); });
        m.l1 = integ([](double) { return 1.0; });
        auto f2 = [&](double r) {
            double a = abs_at(r);
            return Complex(a * a * r, 0.0);
        };
        m.l2 = 2.0 * pi * quad::adaptive_gk(f2, breaks, 1e-12, 1e-10, 2000).real();
        m.finite = std::isfinite(m.m_plus) && std::isfinite(m.m_minus) &&
                   std::isfinite(m.l1) && std::isfinite(m.l2);
        return m;
    }

private:
    static Complex component_at(const std::vector<Term>& terms, double r) {
        Complex v(0.0, 0.0);
        for (const auto& t : terms) v += t.amplitude * t.profile(r);
        return v;
    }
};

/// Pointwise polar factors of the diagonal matrix: a = |v|^{1/2} >= 0,
/// b = v / |v|^{1/2}, so b a = v and |b| = a.
struct FactorPair {
    PotentialSpec spec;

    static double a_of(Complex v) { return std::sqrt(std::abs(v)); }
    static Complex b_of(Complex v) {
        double m = std::abs(v);
        if (m == 0.0) return {0.0, 0.0};
        return v / std::sqrt(m);
    }

    double a11(double r) const { return a_of(spec.v11_at(r)); }
    double a22(double r) const { return a_of(spec.v22_at(r)); }
    Complex b11(double r) const { return b_of(spec.v11_at(r)); }
    Complex b22(double r) const { return b_of(spec.v22_at(r)); }
};

inline FactorPair polar_factors(const PotentialSpec& p) { return {p}; }

/// Convenience builders used across tests and the CLI.
inline PotentialSpec disk_potential(Complex amplitude, double radius,
                                    bool both_components = true) {
    PotentialSpec p;
    Term t{Shape::disk, amplitude, radius, 0.0};
    p.v22.push_back(t);
    if (both_components) p.v11.push_back(t);
    return p;
}

inline PotentialSpec gaussian_potential(Complex amplitude, double width,
                                        bool both_components = true) {
    PotentialSpec p;
    Term t{Shape::gaussian, amplitude, width, 0.0};
    p.v22.push_back(t);
    if (both_components) p.v11.push_back(t);
    return p;
}

}  // namespace abpauli::potential

#endif
