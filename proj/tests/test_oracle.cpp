#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "abpauli/oracle.hpp"

using namespace abpauli;
using namespace abpauli::oracle;
using Catch::Approx;

TEST_CASE("residue identity by tanh-sinh", "[oracle]") {
    CHECK(residue_residual(greenfn::FluxAlpha(0.3), 1.0) <= 1e-10);
    CHECK(residue_residual(greenfn::FluxAlpha(0.7), -2.0) <= 1e-10);
    CHECK(residue_residual(greenfn::FluxAlpha(0.5), 0.0) <= 1e-10);
    CHECK(residue_residual(greenfn::FluxAlpha(0.2), 5.8) <= 1e-10);
    CHECK_THROWS_AS(residue_residual(greenfn::FluxAlpha(0.5), pi),
                    std::domain_error);
    CHECK_THROWS_AS(residue_residual(greenfn::FluxAlpha(0.5), 6.71),
                    std::domain_error);
}

TEST_CASE("expansion residual of the Bessel product", "[oracle]") {
    greenfn::FluxAlpha a(0.3);
    std::vector<double> zs{1e-4, 1e-6, 1e-8}, res_m, res_p;
    for (double z : zs) {
        res_m.push_back(kk_product_residual(a, -z, 1.0, 2.0, greenfn::Spin::minus));
        res_p.push_back(kk_product_residual(a, -z, 1.0, 2.0, greenfn::Spin::plus));
    }
    CHECK(res_m[1] <= 10.0 * std::pow(1e-6, 0.3));
    double slope_m = std::log(res_m[0] / res_m[2]) / std::log(zs[0] / zs[2]);
    double slope_p = std::log(res_p[0] / res_p[2]) / std::log(zs[0] / zs[2]);
    CHECK(slope_m == Approx(0.3).epsilon(0.10));
    CHECK(slope_p == Approx(0.3).epsilon(0.10));

    // alpha = 1/2: both spins share one residual profile
    greenfn::FluxAlpha ah(0.5);
    for (double z : zs) {
        double rm = kk_product_residual(ah, -z, 0.7, 1.9, greenfn::Spin::minus);
        double rp = kk_product_residual(ah, -z, 0.7, 1.9, greenfn::Spin::plus);
        CHECK(std::abs(rm - rp) <= 1e-12 * (rm + rp + 1e-300));
    }
}

TEST_CASE("brute-force coupling integrals", "[oracle]") {
    {
        greenfn::FluxAlpha a(0.5);
        auto pot = potential::disk_potential({-1.0, 0.0}, 1.0);
        auto u = brute_U(a, pot, 512);
        CHECK(std::abs(u.u11 - Complex(-1.0, 0.0)) < 1e-4);
        CHECK(std::abs(u.u22 - Complex(-1.0, 0.0)) < 1e-4);
        auto uc = weakcoupling::compute_U(a, pot);
        CHECK(std::abs(u.u11 - uc.u11) <= 1e-5 * std::abs(uc.u11));
        CHECK(std::abs(u.u22 - uc.u22) <= 1e-5 * std::abs(uc.u22));
    }
    {
        auto u = brute_U(greenfn::FluxAlpha(0.3), potential::PotentialSpec{}, 128);
        CHECK(std::abs(u.u11) == 0.0);
        CHECK(std::abs(u.u22) == 0.0);
    }
    {
        greenfn::FluxAlpha a(0.25);
        auto pot = potential::disk_potential({-1.0, 0.0}, 1.0, false);
        auto u = brute_U(a, pot, 512);
        double ca = std::sin(pi * 0.25) / (4.0 * pi * pi);
        double g = std::tgamma(0.25);
        double closed = -ca * g * g * std::pow(2.0, 0.5) * 2.0 * pi / 1.5;
        CHECK(std::abs(u.u22 - Complex(closed, 0.0)) < 1e-3);
    }
    CHECK_THROWS_AS(brute_U(greenfn::FluxAlpha(0.5),
                            potential::disk_potential({-1.0, 0.0}, 1.0), 32),
                    std::domain_error);
}

TEST_CASE("brute-force U converges at first order", "[oracle]") {
    greenfn::FluxAlpha a(0.52);
    auto pot = potential::gaussian_potential({-1.0, 0.0}, 1.0);
    auto exact = weakcoupling::compute_U(a, pot);
    double e11[2], e22[2];
    int idx = 0;
    for (int n : {128, 256}) {
        auto u = brute_U(a, pot, n);
        e11[idx] = std::abs(u.u11 - exact.u11);
        e22[idx] = std::abs(u.u22 - exact.u22);
        ++idx;
    }
    CHECK(e11[0] / e11[1] > 1.7);
    CHECK(e11[0] / e11[1] < 2.3);
    CHECK(e22[0] / e22[1] > 1.7);
    CHECK(e22[0] / e22[1] < 2.3);
}

TEST_CASE("radial finite-difference ground state", "[oracle]") {
    greenfn::FluxAlpha a(0.5);
    auto pot = potential::disk_potential({-1.0, 0.0}, 1.0);

    auto z = radial_fd_ground_state(a, 0.1, pot, greenfn::Spin::minus, {});
    REQUIRE(z.has_value());
    CHECK(*z >= -0.013);
    CHECK(*z <= -0.008);

    RadialGrid1D fr;
    fr.bc = BoundaryCondition::friedrichs;
    auto zf = radial_fd_ground_state(a, 0.1, pot, greenfn::Spin::minus, fr);
    CHECK_FALSE(zf.has_value());

    auto z2 = radial_fd_ground_state(a, 0.05, pot, greenfn::Spin::minus, {});
    REQUIRE(z2.has_value());
    CHECK(*z2 / *z == Approx(0.25).epsilon(0.10));

    RadialGrid1D half;
    half.n = 2000;
    auto zh = radial_fd_ground_state(a, 0.1, pot, greenfn::Spin::minus, half);
    REQUIRE(zh.has_value());
    CHECK(std::abs(*zh - *z) <= 0.02 * std::abs(*z));

    auto rep = potential::disk_potential({1.0, 0.0}, 1.0);
    CHECK_FALSE(radial_fd_ground_state(a, 0.1, rep, greenfn::Spin::minus, {})
                    .has_value());

    auto cplx = potential::disk_potential({0.0, -1.0}, 1.0);
    CHECK_THROWS_AS(
        radial_fd_ground_state(a, 0.1, cplx, greenfn::Spin::minus, {}),
        std::invalid_argument);
}

TEST_CASE("cutoff form decay slopes", "[oracle]") {
    std::vector<double> ns{8, 16, 32, 64, 128};
    {
        greenfn::FluxAlpha a(0.3);
        auto plus = cutoff_form_decay(a, greenfn::Spin::plus, ns);
        CHECK(plus.slope == Approx(2.0 * 0.3 - 2.0).epsilon(0.02));
        auto minus = cutoff_form_decay(a, greenfn::Spin::minus, ns);
        CHECK(minus.slope == Approx(-2.0 * 0.3).epsilon(0.02));
    }
    {
        greenfn::FluxAlpha a(0.5);
        auto plus = cutoff_form_decay(a, greenfn::Spin::plus, ns);
        auto minus = cutoff_form_decay(a, greenfn::Spin::minus, ns);
        CHECK(plus.slope == Approx(-1.0).epsilon(0.02));
        CHECK(minus.slope == Approx(-1.0).epsilon(0.02));
    }
}
