#pragma once

// Adaptive Gauss-Legendre quadrature with panel bisection; real and complex.

#include <functional>

#include "lowzero/common.hpp"

namespace lowzero::quad {

// Nodes/weights of 15-point Gauss-Legendre on [-1, 1].
struct GL15 {
    static const double x[15];
    static const double w[15];
};

template <typename F>
auto gl15(F&& f, double a, double b) {
    double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    auto acc = f(mid + half * GL15::x[0]) * (half * GL15::w[0]);
    for (int i = 1; i < 15; ++i) acc += f(mid + half * GL15::x[i]) * (half * GL15::w[i]);
    return acc;
}

// Bisect until |panel - (left + right)| < tol_share; throws accuracy_error on
// non-convergence.  abs_tol is the absolute target for the whole interval.
double integrate(const std::function<double(double)>& f, double a, double b, double abs_tol,
                 int max_depth = 48);
cplx integrate_c(const std::function<cplx(double)>& f, double a, double b, double abs_tol,
                 int max_depth = 48);

}  // namespace lowzero::quad
