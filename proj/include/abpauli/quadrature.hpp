#ifndef ABPAULI_QUADRATURE_HPP
#define ABPAULI_QUADRATURE_HPP

#include <algorithm>
#include <cmath>
#include <mutex>
#include <map>
#include <vector>

#include "abpauli/common.hpp"

namespace abpauli::quad {

struct Rule {
    std::vector<double> x;  // nodes
    std::vector<double> w;  // weights
};

/// Gauss-Legendre nodes/weights on [-1,1], Newton on P_n.
inline Rule gauss_legendre(int n) {
    Rule r;
    r.x.resize(n);
    r.w.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(pi * (i + 0.75) / (n + 0.5));
        double p0 = 0.0, p1 = 0.0, dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            p0 = 1.0;
            p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        r.x[i] = -x;
        r.x[n - 1 - i] = x;
        double w = 2.0 / ((1.0 - x * x) * dp * dp);
        r.w[i] = w;
        r.w[n - 1 - i] = w;
    }
    return r;
}

inline const Rule& gauss_legendre_cached(int n) {
    static std::map<int, Rule> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, gauss_legendre(n)).first;
    return it->second;
}

// 15-point Kronrod / 7-point Gauss pair (QUADPACK dqk15 constants).
namespace detail {
inline constexpr double kr_x[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double kr_w[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double g_w[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};
}  // namespace detail

template <typename F>
inline Complex gk15(const F& f, double a, double b, double& err) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    Complex fv[15];
    for (int i = 0; i < 7; ++i) {
        fv[i] = f(c - h * detail::kr_x[i]);
        fv[14 - i] = f(c + h * detail::kr_x[i]);
    }
    fv[7] = f(c);
    Complex resk(0, 0), resg(0, 0);
    for (int i = 0; i < 7; ++i) resk += detail::kr_w[i] * (fv[i] + fv[14 - i]);
    resk += detail::kr_w[7] * fv[7];
    for (int i = 0; i < 3; ++i)
        resg += detail::g_w[i] * (fv[2 * i + 1] + fv[13 - 2 * i]);
    resg += detail::g_w[3] * fv[7];
    err = std::abs(resk - resg) * std::abs(h);
    return resk * h;
}

/// Adaptive Gauss-Kronrod over a pre-broken panel list. Splits the panel
/// with the largest error estimate until the summed estimate meets
/// abs_tol + rel_tol*|I|.
template <typename F>
inline Complex adaptive_gk(const F& f, std::vector<double> breaks,
                           double abs_tol, double rel_tol = 1e-12,
                           int max_panels = 4000) {
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
    if (breaks.size() < 2) throw numeric_error("adaptive_gk: empty interval");

    struct Panel {
        double a, b, err;
        Complex val;
    };
    std::vector<Panel> panels;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        Panel p{breaks[i], breaks[i + 1], 0.0, {}};
        p.val = gk15(f, p.a, p.b, p.err);
        panels.push_back(p);
    }
    auto total = [&] {
        Complex s(0, 0);
        double e = 0;
        for (auto& p : panels) {
            s += p.val;
            e += p.err;
        }
        return std::pair<Complex, double>(s, e);
    };
    while (true) {
        auto [sum, errsum] = total();
        double tol = abs_tol + rel_tol * std::abs(sum);
        if (errsum <= tol || (int)panels.size() >= max_panels) return sum;
        std::size_t worst = 0;
        for (std::size_t i = 1; i < panels.size(); ++i)
            if (panels[i].err > panels[worst].err) worst = i;
        Panel p = panels[worst];
        double m = 0.5 * (p.a + p.b);
        if (m <= p.a || m >= p.b) return sum;  // interval exhausted
        Panel l{p.a, m, 0.0, {}}, r{m, p.b, 0.0, {}};
        l.val = gk15(f, l.a, l.b, l.err);
        r.val = gk15(f, r.a, r.b, r.err);
        panels[worst] = l;
        panels.push_back(r);
    }
}

template <typename F>
inline Complex adaptive_gk(const F& f, double a, double b, double abs_tol,
                           double rel_tol = 1e-12, int max_panels = 4000) {
    return adaptive_gk(f, std::vector<double>{a, b}, abs_tol, rel_tol,
                       max_panels);
}

/// tanh-sinh quadrature on (a,b); tolerates integrable endpoint
/// singularities. Abscissas near the endpoints are formed from the exact
/// endpoint offset 1 -/+ tanh((pi/2) sinh t), not by cancellation-prone
/// midpoint arithmetic. Level doubling until successive estimates agree.
template <typename F>
inline Complex tanh_sinh(const F& f, double a, double b, double tol,
                         int max_level = 12) {
    const double half = 0.5 * (b - a);
    const double t_max = std::asinh(std::log(4.0 / 1e-300) / pi);
    double h = 1.0;
    auto eval_at = [&](double t, Complex& acc) {
        double st = std::sinh(t) * (pi / 2);
        double ch = std::cosh(t) * (pi / 2);
        double em = std::exp(-2.0 * std::abs(st));
        double off = 2.0 * em / (1.0 + em);  // 1 - |tanh(st)|, exact form
        double sech2 = 4.0 * em / ((1.0 + em) * (1.0 + em));  // 1/cosh^2(st)
        double weight = ch * sech2;
        double xa = (t >= 0.0) ? b - half * off : a + half * off;
        if (xa <= a || xa >= b) return;  // underflowed to the endpoint
        acc += weight * f(xa);
    };
    Complex prev(0, 0);
    Complex s(0, 0);
    eval_at(0.0, s);
    for (double t = h; t < t_max; t += h) {
        eval_at(t, s);
        eval_at(-t, s);
    }
    prev = s * (half * h);
    for (int level = 1; level <= max_level; ++level) {
        h *= 0.5;
        Complex add(0, 0);
        for (double t = h; t < t_max; t += 2 * h) {
            eval_at(t, add);
            eval_at(-t, add);
        }
        Complex cur = prev * 0.5 + add * (half * h);
        if (level >= 4 && std::abs(cur - prev) <= tol * (1.0 + std::abs(cur)))
            return cur;
        prev = cur;
    }
    return prev;
}

}  // namespace abpauli::quad

#endif
