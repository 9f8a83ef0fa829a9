#pragma once

// J-Bessel of integer order with certified evaluation regimes, the envelope
// bound used for truncating trace-formula tails, and complex Gamma.

#include "lowzero/common.hpp"

namespace lowzero::specfun {

enum class BesselRegime { series, asymptotic, recurrence };

struct BesselEval {
    int order = 0;
    double value = 0.0;
    BesselRegime regime = BesselRegime::series;
    double est_abs_error = 0.0;
};

// J_order(x) for order >= 0, x >= 0.
//   x <= 30                : power series in double-double
//   x >= hankel_cut(order) : Hankel asymptotic expansion, remainder <= first
//                            omitted term
//   in between             : backward (Miller) recurrence normalized by
//                            J_0 + 2 J_2 + 2 J_4 + ... = 1
BesselEval bessel_j(int order, double x);

// Smallest x at which the Hankel expansion reaches ~1e-13; never below 30.
double hankel_cut(int order);

// Force a particular evaluation route (for cross-regime verification).
// series is reliable for x <~ 40, recurrence for x >= 1, asymptotic for
// x >= hankel_cut(order) (est_abs_error reports the achieved remainder).
BesselEval bessel_j_via(int order, double x, BesselRegime regime);

// C * min(x^{-1/2}, x^{k-1}); dominates |J_{k-1}(x)| on x > 0 for 2 <= k <= 20.
// C = 1 is false from k ~ 12 on (the first Bessel peak crosses x^{-1/2});
// 1.2 covers the supported weight range with margin.
inline constexpr double envelope_c = 1.2;
inline constexpr int envelope_max_k = 20;
double j_envelope(int k, double x);

// Lanczos approximation with reflection; poles at nonpositive integers throw.
cplx gamma_complex(cplx s);

}  // namespace lowzero::specfun
