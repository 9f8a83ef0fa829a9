#pragma once

// Kuznetsov-layer numerics: the kernel h_u(xi) = J_{k-1}(xi) W(xi/X) e(u xi),
// its +-transform evaluated through the Mehler-Sonine double integral, the
// holomorphic transform phi_h, and the separated kernel H with its 2-D
// Fourier transform.

#include <functional>
#include <vector>

#include "lowzero/common.hpp"
#include "lowzero/testfn.hpp"

namespace lowzero::kuznetsov {

struct KernelSpec {
    int k = 12;          // even weight >= 4
    double X = 1.0;      // dilation of the window
    double u = 0.0;      // linear phase e(u xi)
    double a = 0.5;      // window support (a, b), == 1 on [a1, b1]
    double b = 3.0;
    double a1 = 0.8;
    double b1 = 2.0;
};

void validate(const KernelSpec& spec);

// W(y): 0 off (a,b), 1 on [a1,b1], C-infinity ramps between.
double window(const KernelSpec& spec, double y);

cplx h_u_eval(const KernelSpec& spec, double xi);

// phi_+(z) = (2 pi i / sinh(pi z)) int (J_{2iz} - J_{-2iz})(xi) h_u(xi) dxi/xi
//          = 8 int_0^inf int_0^inf cos(x cosh y) cos(2 z y) h_u(x) dy dx / x,
// by the Mehler-Sonine integrals.  Valid for real z and for |Im z| < 1/2.
// Target absolute error ~1e-8; throws accuracy_error when unattainable.
// refine > 1 shrinks all panels by that factor (for stability checks).
cplx phi_plus(const KernelSpec& spec, cplx z);
cplx phi_plus(const KernelSpec& spec, cplx z, double refine);

// phi_h(l) = 4 i^k int_0^inf J_{l-1}(xi) h_u(xi) dxi/xi for even l >= 2.
cplx phi_h(const KernelSpec& spec, int l);

struct SeparatedKernel {
    double X = 1.0;
    double P = 16.0;
    double Q = 64.0;
    testfn::WeightFunction psi;
    testfn::TestFunctionPair phi;
};

// H(xi, lambda) = Psi((X/xi) sqrt(lambda)) * log Q / log((X/xi) sqrt(lambda) Q)
//                 * phihat((log lambda + log P)/log((X/xi) sqrt(lambda) Q))
double separated_H(const SeparatedKernel& sk, double xi, double lambda);

// 2-D Fourier transform over the compact support (lambda runs over the dyadic
// window's range [1/2, 3]).
cplx hat_H(const SeparatedKernel& sk, double u, double v);

// Envelope-fit report for the h_+ bounds (fitted constants, refinement-stable).
struct BoundCase {
    double X, u, r_or_delta;
    double value;    // |h_+|
    double envelope;
    double ratio;
};

struct HPlusBoundReport {
    std::vector<BoundCase> lemma34_1;   // real r case
    std::vector<BoundCase> lemma86;     // imaginary argument case
    double max_ratio_34 = 0.0;
    double max_ratio_86 = 0.0;
};

HPlusBoundReport verify_hplus_bounds(const std::vector<double>& xs, const std::vector<double>& us,
                                     const std::vector<double>& rs,
                                     const std::vector<double>& deltas, int k);

}  // namespace lowzero::kuznetsov
