#pragma once

// Test functions for the density statistic: even Phi with compactly supported
// Fourier transform, the smooth level weight Psi, and the dyadic window V.
// Fourier convention: hat{f}(t) = int f(x) e^{-2 pi i x t} dx.

#include <functional>

#include "lowzero/common.hpp"

namespace lowzero::testfn {

enum class PhiKind { fejer, smooth_bump };

struct TestFunctionPair {
    double sigma = 1.0;  // support radius of phi_hat
    PhiKind kind = PhiKind::fejer;
    std::function<double(double)> phi;
    std::function<double(double)> phi_hat;
};

// phi_hat(t) = max(0, 1 - |t|/sigma), phi(x) = sigma sinc^2(pi sigma x).
// Closed forms on both sides; the default for acceptance runs.
TestFunctionPair make_fejer(double sigma);

// phi_hat is the C-infinity bump exp(-1/(1-(t/sigma)^2)) normalized to 1 at 0;
// phi comes from quadrature of the inverse transform with cached panels.
TestFunctionPair make_smooth_bump(double sigma);

struct WeightFunction {
    double a = 1.0, b = 2.0;
    std::function<double(double)> psi;
    double psi_hat_zero = 0.0;  // int psi
};

WeightFunction make_weight(double a, double b);

struct DyadicWindow {
    std::function<double(double)> v;  // supported on [1/2, 3]; dyadic translates sum to 1
};

DyadicWindow make_dyadic_window();

// int f(x) x^{s-1} dx over [lo, hi] subset (0, inf), absolute target 1e-10.
cplx mellin_numeric(const std::function<cplx(double)>& f, cplx s, double lo, double hi);

}  // namespace lowzero::testfn
