#include <cmath>

#include "doctest.h"
#include "lowzero/quadrature.hpp"
#include "lowzero/testfn.hpp"

using namespace lowzero;
using namespace lowzero::testfn;

TEST_CASE("fejer pair: closed-form anchors") {
    auto p = make_fejer(1.0);
    CHECK(p.phi(0.0) == doctest::Approx(1.0));
    CHECK(p.phi_hat(0.0) == doctest::Approx(1.0));
    CHECK(p.phi_hat(2.0) == 0.0);
    CHECK(p.phi_hat(1.0) == 0.0);
    auto p2 = make_fejer(2.0);
    CHECK(p2.phi(0.0) == doctest::Approx(2.0));
    CHECK_THROWS_AS(make_fejer(0.0), std::domain_error);
}

TEST_CASE("fejer: integral of phi equals phi_hat(0) to 1e-6") {
    // int_{-T}^{T} phi + exact-shape tail correction 1/(pi^2 sigma T)
    double sigma = 2.0;
    auto p = make_fejer(sigma);
    double T = 3000.0;
    kahan_sum acc;
    double step = 0.25 / sigma;  // a few panels per sinc period
    for (double a = 0.0; a < T; a += step)
        acc.add(quad::gl15([&](double x) { return p.phi(x); }, a, std::min(a + step, T)));
    double integral = 2.0 * acc.value() + 1.0 / (pi * pi * sigma * T);
    CHECK(integral == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("smooth bump pair") {
    auto p = make_smooth_bump(1.0);
    CHECK(p.phi_hat(1.0) == 0.0);
    CHECK(p.phi_hat(-1.0) == 0.0);
    CHECK(p.phi_hat(0.0) == doctest::Approx(1.0));
    for (double x : {0.3, 1.7}) CHECK(std::abs(p.phi(x) - p.phi(-x)) < 1e-10);
    // phi(0) = int phi_hat by an independent quadrature
    double direct = quad::integrate([&](double t) { return p.phi_hat(t); }, -1.0, 1.0, 1e-12);
    CHECK(std::abs(p.phi(0.0) - direct) < 1e-8);
}

TEST_CASE("fourier round trip for both kinds") {
    for (double sigma : {0.5, 1.0, 2.0}) {
        for (auto kind : {PhiKind::fejer, PhiKind::smooth_bump}) {
            auto p = kind == PhiKind::fejer ? make_fejer(sigma) : make_smooth_bump(sigma);
            for (double x : {0.0, 0.17, 0.8, 1.9, 3.1}) {
                cplx back = quad::integrate_c(
                    [&](double t) -> cplx { return p.phi_hat(t) * e_of(x * t); }, -sigma, sigma,
                    1e-11);
                CHECK(std::abs(back - cplx{p.phi(x), 0.0}) < 1e-6);
            }
        }
    }
}

TEST_CASE("weight function") {
    auto w = make_weight(1.0, 2.0);
    CHECK(w.psi(1.5) > 0.0);
    CHECK(w.psi(1.0) == 0.0);
    CHECK(w.psi(2.0) == 0.0);
    CHECK(w.psi(0.5) == 0.0);
    double q = quad::integrate(w.psi, 0.9, 2.1, 5e-13);
    CHECK(std::abs(w.psi_hat_zero - q) < 1e-10);
    CHECK(w.psi_hat_zero > 0.0);
    CHECK_THROWS_AS(make_weight(2.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(make_weight(0.0, 1.0), std::domain_error);
}

TEST_CASE("dyadic window: partition of unity") {
    auto d = make_dyadic_window();
    // support inside [1/2, 3]
    CHECK(d.v(0.49) == 0.0);
    CHECK(d.v(3.01) == 0.0);
    for (double x : {1.0, 7.0, 1000.0}) {
        kahan_sum s;
        for (int j = 0; j <= 20; ++j) s.add(d.v(x / std::pow(2.0, j)));
        CHECK(std::abs(s.value() - 1.0) < 1e-10);
    }
    for (double x = 1.0; x <= 1e6; x *= 1.618) {
        kahan_sum s;
        for (int j = 0; j <= 24; ++j) s.add(d.v(x / std::pow(2.0, j)));
        CHECK(std::abs(s.value() - 1.0) < 1e-10);
    }
}

TEST_CASE("mellin_numeric") {
    auto w = make_weight(1.0, 2.0);
    auto f = [&](double x) -> cplx { return {w.psi(x), 0.0}; };
    // s = 1 reduces to the plain integral
    cplx at1 = mellin_numeric(f, {1.0, 0.0}, 1.0, 2.0);
    CHECK(std::abs(at1 - cplx{w.psi_hat_zero, 0.0}) < 1e-8);
    // s = 2 is int psi(x) x dx
    cplx at2 = mellin_numeric(f, {2.0, 0.0}, 1.0, 2.0);
    double oracle = quad::integrate([&](double x) { return w.psi(x) * x; }, 1.0, 2.0, 1e-12);
    CHECK(std::abs(at2 - cplx{oracle, 0.0}) < 1e-8);
    // decay along vertical lines: dominated by a (1+|t|)^{-2} envelope with a
    // single constant, and below 1e-3 of the t = 0 value by t = 120
    cplx lo = mellin_numeric(f, {0.5, 0.0}, 1.0, 2.0);
    double cfit = 0.0;
    for (double t : {10.0, 20.0, 40.0, 80.0, 120.0}) {
        double ratio = std::abs(mellin_numeric(f, {0.5, t}, 1.0, 2.0)) / std::abs(lo);
        cfit = std::max(cfit, ratio * (1.0 + t) * (1.0 + t));
    }
    CHECK(cfit < 64.0);
    CHECK(std::abs(mellin_numeric(f, {0.5, 40.0}, 1.0, 2.0)) < 0.02 * std::abs(lo));
    CHECK(std::abs(mellin_numeric(f, {0.5, 120.0}, 1.0, 2.0)) < 1e-3 * std::abs(lo));
}
