#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <random>

#include "abpauli/greenfn.hpp"

using namespace abpauli;
using namespace abpauli::greenfn;
using Catch::Approx;

namespace {

// m-th Fourier coefficient in phi of a spin-channel kernel at fixed radii;
// offset trapezoid grid, spectrally accurate for the periodic kernel.
Complex fourier_mode(const FluxAlpha& a, const SpectralParameter& sp, double r,
                     double r0, Spin s, int m, int n = 96) {
    Complex acc(0, 0);
    for (int j = 0; j < n; ++j) {
        double phi = -pi + (j + 0.5) * 2.0 * pi / n;
        Complex g = green_pauli(a, sp, {r, phi}, {r0, 0.0}, s);
        acc += g * std::exp(Complex(0.0, -m * phi));
    }
    return acc / (double)n;
}
}  // namespace

TEST_CASE("c_hat three cases", "[greenfn]") {
    FluxAlpha a03(0.3), a05(0.5);
    CHECK(std::abs(c_hat(0.0, a03) - Complex(1.0 / (2 * pi), 0)) < 1e-15);
    CHECK(std::abs(c_hat(1.5 * pi, a05) - Complex(-1.0 / (2 * pi), 0)) < 1e-15);
    CHECK(std::abs(c_hat(-1.5 * pi, a03) -
                   std::exp(Complex(0, -2 * pi * 0.3)) / (2 * pi)) < 1e-15);
    CHECK_THROWS_AS(c_hat(pi, a03), std::domain_error);
    CHECK_THROWS_AS(c_hat(-pi + 5e-10, a03), std::domain_error);
}

TEST_CASE("spectral parameter branch", "[greenfn]") {
    CHECK_THROWS_AS(SpectralParameter(Complex(1.0, 0.0)), std::domain_error);
    CHECK_THROWS_AS(SpectralParameter(Complex(0.0, 0.0)), std::domain_error);
    SpectralParameter sp(Complex(-4.0, 0.0));
    CHECK(sp.kappa.real() == Approx(2.0));
    SpectralParameter spc(Complex(2.0, 1e-3));
    CHECK(spc.kappa.real() > 0.0);
}

TEST_CASE("friedrichs kernel vs partial-wave oracle", "[greenfn]") {
    FluxAlpha a(0.3);
    SpectralParameter sp(Complex(-1.0, 0.0));
    PolarPoint x{1.0, 0.7}, x0{1.5, -0.4};
    Complex g = green_friedrichs(a, sp, x, x0);
    auto pw = partial_wave_green(a, sp, x, x0, 80);
    CHECK(std::abs(g - pw.value) < 1e-8);
    CHECK(pw.tail_bound < 1e-10);

    // doubling m_max does not move the converged sum
    auto pw40 = partial_wave_green(a, sp, x, x0, 40);
    CHECK(std::abs(pw40.value - pw.value) < 1e-10);

    // kernel symmetry of the self-adjoint resolvent at real z
    Complex gswap = green_friedrichs(a, sp, x0, x);
    CHECK(std::abs(g - std::conj(gswap)) < 1e-9);

    // partial-wave conjugate symmetry in the angle at real z
    auto pw_neg = partial_wave_green(a, sp, {1.0, -0.7}, {1.5, 0.4}, 60);
    auto pw_pos = partial_wave_green(a, sp, {1.0, 0.7}, {1.5, -0.4}, 60);
    CHECK(std::abs(pw_pos.value - std::conj(pw_neg.value)) < 1e-12);

    CHECK_THROWS_AS(partial_wave_green(a, sp, x, x0, 0), std::domain_error);
    CHECK_THROWS_AS(green_friedrichs(a, sp, x, x), abpauli::numeric_error);
}

TEST_CASE("oracle equivalence on random samples", "[greenfn]") {
    std::mt19937 rng(20250811);
    std::uniform_real_distribution<double> ua(0.08, 0.92), uz(0.15, 4.0),
        ur(0.25, 2.2), uth(-3.0, 3.0);
    for (int t = 0; t < 6; ++t) {
        FluxAlpha a(ua(rng));
        SpectralParameter sp(Complex(-uz(rng), 0.0));
        double r0 = ur(rng);
        double r1 = r0 * (1.35 + 0.8 * ua(rng));  // keep radii separated
        PolarPoint x{r0, uth(rng)}, x0{r1, uth(rng)};
        if (std::abs(std::abs(x.theta - x0.theta) - pi) < 0.1) x.theta += 0.2;
        Complex g = green_friedrichs(a, sp, x, x0);
        auto pw = partial_wave_green(a, sp, x, x0, 80);
        INFO("alpha=" << a.alpha << " z=" << sp.z << " r=" << x.r
                      << " r0=" << x0.r << " dth=" << x.theta - x0.theta);
        CHECK(std::abs(g - pw.value) < 1e-8);
    }
}

TEST_CASE("log singularity in z cancels", "[greenfn]") {
    // After the log cancellation the kernel tends to a finite limit with
    // corrections of order |z|^{min(alpha,1-alpha)} carried by the two
    // critical angular channels. Reference 40-digit partial-wave values:
    // |G(-1e-6)-G(-1e-8)| = 6.1940209e-4, |G(-1e-8)-G(-1e-10)| = 9.7295653e-5.
    FluxAlpha a(0.4);
    PolarPoint x{1.1, 0.4}, x0{0.8, -0.9};
    auto at = [&](double z) {
        return green_friedrichs(a, SpectralParameter(Complex(z, 0)), x, x0);
    };
    double d68 = std::abs(at(-1e-6) - at(-1e-8));
    double d810 = std::abs(at(-1e-8) - at(-1e-10));
    CHECK(std::abs(d68 - 6.1940209e-4) < 1e-9);
    CHECK(d68 <= std::pow(1e-6, 0.4));
    CHECK(d810 < d68);
    double ratio = d68 / d810;
    CHECK(ratio > 0.8 * std::pow(100.0, 0.4));
    CHECK(ratio < 1.25 * std::pow(100.0, 0.4));
}

TEST_CASE("rank-one channel identities", "[greenfn]") {
    FluxAlpha a(0.3);
    SpectralParameter sp(Complex(-1.0, 0.0));
    const double r = 0.8, r0 = 1.3;
    Complex kap = sp.kappa;

    Complex c0 = fourier_mode(a, sp, r, r0, Spin::minus, 0);
    Complex want0 = specfun::bessel_i(-a.alpha, kap * r) *
                    specfun::bessel_k(a.alpha, kap * r0) / (2.0 * pi);
    CHECK(std::abs(c0 - want0) < 1e-8);

    Complex cm1 = fourier_mode(a, sp, r, r0, Spin::plus, -1);
    Complex wantm1 = specfun::bessel_i(-(1.0 - a.alpha), kap * r) *
                     specfun::bessel_k(1.0 - a.alpha, kap * r0) / (2.0 * pi);
    CHECK(std::abs(cm1 - wantm1) < 1e-8);

    // a non-critical channel for contrast: m = 1, spin minus
    Complex c1 = fourier_mode(a, sp, r, r0, Spin::minus, 1);
    Complex want1 = specfun::bessel_i(1.0 + a.alpha, kap * r) *
                    specfun::bessel_k(1.0 + a.alpha, kap * r0) / (2.0 * pi);
    CHECK(std::abs(c1 - want1) < 1e-8);
}

TEST_CASE("hermitian kernel symmetry of the spin channels", "[greenfn]") {
    FluxAlpha a(0.45);
    SpectralParameter sp(Complex(-0.7, 0.0));
    PolarPoint x{0.9, 1.2}, x0{1.7, -2.0};
    for (Spin s : {Spin::plus, Spin::minus}) {
        Complex g = green_pauli(a, sp, x, x0, s);
        Complex gT = green_pauli(a, sp, x0, x, s);
        CHECK(std::abs(g - std::conj(gT)) < 1e-9);
    }
}

TEST_CASE("regular part and leading singularity", "[greenfn]") {
    // defining decomposition at alpha = 1/2
    {
        FluxAlpha a(0.5);
        SpectralParameter sp(Complex(-1.0, 0.0));
        PolarPoint x{1.2, 0.3}, x0{0.7, -0.8};
        for (Spin s : {Spin::plus, Spin::minus}) {
            Complex lhs = green_pauli(a, sp, x, x0, s) -
                          green_regular(a, sp, x, x0, s);
            Complex rhs = leading_singularity(a, sp, x, x0, s);
            CHECK(std::abs(lhs - rhs) <= 1e-10 * std::abs(rhs));
        }
    }
    // closed-form value of the leading singularity
    {
        FluxAlpha a(0.5);
        SpectralParameter sp(Complex(-1e-6, 0.0));
        Complex lead =
            leading_singularity(a, sp, {1.0, 0.4}, {1.0, 0.4}, Spin::minus);
        CHECK(std::abs(lead - Complex(2000.0 / (4.0 * pi), 0.0)) <
              1e-9 * 159.0);
        Complex lp = leading_singularity(a, sp, {1.0, pi / 2}, {1.0, 0.0},
                                         Spin::plus);
        CHECK(std::arg(lp) == Approx(-pi / 2).margin(1e-12));
    }
    // boundedness of the regular part as z -> 0
    {
        FluxAlpha a(0.25);
        PolarPoint x{1.0, 0.6}, x0{2.0, -0.3};
        Complex g4 = green_regular(a, SpectralParameter(Complex(-1e-4, 0)), x,
                                   x0, Spin::minus);
        Complex g6 = green_regular(a, SpectralParameter(Complex(-1e-6, 0)), x,
                                   x0, Spin::minus);
        CHECK(std::isfinite(std::abs(g4)));
        CHECK(std::abs(g4) <= 10.0 * std::abs(g6));
    }
    // z-increment law of the regular part
    {
        FluxAlpha a(0.3);
        PolarPoint x{1.0, 0.6}, x0{2.0, -0.3};
        auto greg = [&](double z) {
            return green_regular(a, SpectralParameter(Complex(z, 0)), x, x0,
                                 Spin::minus);
        };
        double d1 = std::abs(greg(-1e-4) - greg(-1e-6));
        double d2 = std::abs(greg(-1e-6) - greg(-1e-8));
        double slope = std::log(d1 / d2) / std::log(100.0);
        CHECK(slope >= 0.9 * 0.3);
    }
    // ratio law against the full kernel
    {
        FluxAlpha a(0.3);
        PolarPoint x{1.0, 0.9}, x0{1.0, 0.0};
        std::vector<double> dev, zs;
        for (double z : {1e-4, 1e-6, 1e-8}) {
            SpectralParameter sp(Complex(-z, 0.0));
            Complex ratio = green_pauli(a, sp, x, x0, Spin::minus) /
                            leading_singularity(a, sp, x, x0, Spin::minus);
            dev.push_back(std::abs(ratio - 1.0));
            zs.push_back(z);
        }
        double slope = std::log(dev[0] / dev[2]) / std::log(zs[0] / zs[2]);
        CHECK(slope >= 0.9 * 0.3);
    }
}

TEST_CASE("residue identity via the module quadrature", "[greenfn]") {
    for (double alpha : {0.1, 0.3, 0.5, 0.7, 0.9}) {
        FluxAlpha a(alpha);
        for (double phi : {-5.9, -4.0, -2.0, -0.3, 0.0, 1.0, 2.8, 3.6, 5.5}) {
            INFO("alpha=" << alpha << " phi=" << phi);
            CHECK(residue_check(a, phi) <= 1e-8);
        }
    }
}

TEST_CASE("continuity across the angular cut", "[greenfn]") {
    FluxAlpha a(0.35);
    SpectralParameter sp(Complex(-1.3, 0.0));
    auto at = [&](double phi) {
        return green_friedrichs(a, sp, {1.0, phi / 2}, {1.4, -phi / 2});
    };
    double base = std::abs(at(pi - 1e-4));
    double d4 = std::abs(at(pi - 1e-4) - at(pi + 1e-4));
    double d5 = std::abs(at(pi - 1e-5) - at(pi + 1e-5));
    CHECK(d4 <= 1e-3 * base);
    CHECK(d5 / d4 > 0.02);
    CHECK(d5 / d4 < 0.4);
}

TEST_CASE("boundary fit on pure powers", "[greenfn]") {
    FluxAlpha a(0.3);
    auto f = [&](double r, double) { return Complex(std::pow(r, -a.alpha), 0); };
    auto fit = boundary_fit(f, a);
    CHECK(std::abs(fit.phi1_0 - 1.0) < 1e-8);
    CHECK(std::abs(fit.phi2_0) * fit.colnorm_0_reg <
          1e-8 * fit.colnorm_0_sing);
    CHECK(std::abs(fit.phi1_m1) < 1e-12);
    CHECK(std::abs(fit.phi2_m1) < 1e-12);

    BoundaryFitOptions degenerate;
    degenerate.r_min = 1e-4;
    degenerate.r_max = 1.0000001e-4;
    degenerate.n_r = 4;
    CHECK_THROWS_AS(boundary_fit(f, a, degenerate), abpauli::fit_error);
}

TEST_CASE("boundary conditions of the spin-channel kernels", "[greenfn]") {
    FluxAlpha a(0.3);
    SpectralParameter sp(Complex(-0.1, 0.0));
    PolarPoint x0{1.0, 0.3};

    auto fplus = [&](double r, double th) {
        return green_pauli(a, sp, {r, th}, x0, Spin::plus);
    };
    auto fit_p = boundary_fit(fplus, a);
    // admitted: r^{-(1-a)} e^{-i theta} and r^{a}; forbidden: r^{1-a}, r^{-a}
    double lead_m1 = std::abs(fit_p.phi1_m1) * fit_p.colnorm_m1_sing;
    double lead_0 = std::abs(fit_p.phi2_0) * fit_p.colnorm_0_reg;
    CHECK(std::abs(fit_p.phi2_m1) * fit_p.colnorm_m1_reg <= 1e-6 * lead_m1);
    CHECK(std::abs(fit_p.phi1_0) * fit_p.colnorm_0_sing <= 1e-6 * lead_0);

    auto fminus = [&](double r, double th) {
        return green_pauli(a, sp, {r, th}, x0, Spin::minus);
    };
    auto fit_m = boundary_fit(fminus, a);
    double lead_0m = std::abs(fit_m.phi1_0) * fit_m.colnorm_0_sing;
    double lead_m1m = std::abs(fit_m.phi2_m1) * fit_m.colnorm_m1_reg;
    CHECK(std::abs(fit_m.phi1_m1) * fit_m.colnorm_m1_sing <= 1e-6 * lead_m1m);
    CHECK(std::abs(fit_m.phi2_0) * fit_m.colnorm_0_reg <= 1e-6 * lead_0m);
}
