#include "lowzero/testfn.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>
#include <vector>

#include "lowzero/quadrature.hpp"

namespace lowzero::quad {

const double GL15::x[15] = {
    -0.98799251802048542849, -0.93727339240070590431, -0.84820658341042721620,
    -0.72441773136017004742, -0.57097217260853884754, -0.39415134707756336990,
    -0.20119409399743452230, 0.0,
    0.20119409399743452230,  0.39415134707756336990,  0.57097217260853884754,
    0.72441773136017004742,  0.84820658341042721620,  0.93727339240070590431,
    0.98799251802048542849};
const double GL15::w[15] = {
    0.03075324199611726835, 0.07036604748810812471, 0.10715922046717193501,
    0.13957067792615431445, 0.16626920581699393355, 0.18616100001556221103,
    0.19843148532711157646, 0.20257824192556127288, 0.19843148532711157646,
    0.18616100001556221103, 0.16626920581699393355, 0.13957067792615431445,
    0.10715922046717193501, 0.07036604748810812471, 0.03075324199611726835};

namespace {

template <typename T, typename Abs>
T adaptive(const std::function<T(double)>& f, double a, double b, double tol, int depth,
           Abs magnitude) {
    T whole = gl15(f, a, b);
    struct Frame {
        double a, b, tol;
        T whole;
        int depth;
    };
    std::vector<Frame> stack{{a, b, tol, whole, depth}};
    T total{};
    bool first = true;
    while (!stack.empty()) {
        Frame fr = stack.back();
        stack.pop_back();
        double m = 0.5 * (fr.a + fr.b);
        T left = gl15(f, fr.a, m);
        T right = gl15(f, m, fr.b);
        T sum = left + right;
        if (magnitude(sum - fr.whole) < fr.tol || fr.depth <= 0) {
            if (fr.depth <= 0 && magnitude(sum - fr.whole) > fr.tol * 16)
                throw accuracy_error("quadrature: panel did not converge",
                                     0.0, magnitude(sum - fr.whole));
            if (first) {
                total = sum;
                first = false;
            } else {
                total += sum;
            }
            continue;
        }
        stack.push_back({fr.a, m, fr.tol * 0.5, left, fr.depth - 1});
        stack.push_back({m, fr.b, fr.tol * 0.5, right, fr.depth - 1});
    }
    return total;
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b, double abs_tol,
                 int max_depth) {
    if (a == b) return 0.0;
    return adaptive<double>(f, a, b, abs_tol, max_depth, [](double v) { return std::abs(v); });
}

cplx integrate_c(const std::function<cplx(double)>& f, double a, double b, double abs_tol,
                 int max_depth) {
    if (a == b) return {0.0, 0.0};
    return adaptive<cplx>(f, a, b, abs_tol, max_depth, [](cplx v) { return std::abs(v); });
}

}  // namespace lowzero::quad

namespace lowzero::testfn {

namespace {

double sinc(double t) {
    if (std::abs(t) < 1e-8) return 1.0 - t * t / 6.0;
    return std::sin(t) / t;
}

// C-infinity cutoff: 0 at t <= 0, 1 at t >= 1, 1/(1 + e^{1/t - 1/(1-t)}) between.
double smoothstep(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    return 1.0 / (1.0 + std::exp(1.0 / t - 1.0 / (1.0 - t)));
}

double bump01(double u) {  // exp(-1/(1-u^2)) scaled to 1 at u = 0, supported (-1,1)
    if (std::abs(u) >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - u * u));
}

}  // namespace

TestFunctionPair make_fejer(double sigma) {
    if (!(sigma > 0.0)) throw std::domain_error("make_fejer: sigma must be > 0");
    TestFunctionPair p;
    p.sigma = sigma;
    p.kind = PhiKind::fejer;
    p.phi = [sigma](double x) {
        double s = sinc(pi * sigma * x);
        return sigma * s * s;
    };
    p.phi_hat = [sigma](double t) { return std::max(0.0, 1.0 - std::abs(t) / sigma); };
    return p;
}

TestFunctionPair make_smooth_bump(double sigma) {
    if (!(sigma > 0.0)) throw std::domain_error("make_smooth_bump: sigma must be > 0");
    TestFunctionPair p;
    p.sigma = sigma;
    p.kind = PhiKind::smooth_bump;
    p.phi_hat = [sigma](double t) { return bump01(t / sigma); };

    // Phi(x) = 2 int_0^sigma phihat(t) cos(2 pi x t) dt, through panels cached
    // at construction; fresh adaptive quadrature once the phase outruns them.
    const int n_panels = 96;
    auto nodes = std::make_shared<std::vector<std::pair<double, double>>>();  // (t, w*phihat)
    for (int pnl = 0; pnl < n_panels; ++pnl) {
        double a = sigma * pnl / n_panels, b = sigma * (pnl + 1) / n_panels;
        double mid = 0.5 * (a + b), half = 0.5 * (b - a);
        for (int i = 0; i < 15; ++i) {
            double t = mid + half * quad::GL15::x[i];
            nodes->emplace_back(t, half * quad::GL15::w[i] * bump01(t / sigma));
        }
    }
    auto hat = p.phi_hat;
    p.phi = [sigma, nodes, hat](double x) {
        double ax = std::abs(x);
        if (two_pi * sigma * ax > 150.0) {
            return 2.0 * quad::integrate(
                             [&](double t) { return hat(t) * std::cos(two_pi * x * t); }, 0.0,
                             sigma, 1e-12);
        }
        kahan_sum acc;
        for (auto& [t, w] : *nodes) acc.add(w * std::cos(two_pi * x * t));
        return 2.0 * acc.value();
    };
    return p;
}

WeightFunction make_weight(double a, double b) {
    if (!(0.0 < a && a < b)) throw std::domain_error("make_weight: need 0 < a < b");
    WeightFunction w;
    w.a = a;
    w.b = b;
    w.psi = [a, b](double x) {
        double u = (2.0 * x - a - b) / (b - a);
        return bump01(u);
    };
    w.psi_hat_zero = quad::integrate(w.psi, a, b, 1e-12);
    return w;
}

DyadicWindow make_dyadic_window() {
    DyadicWindow d;
    // V(x) = s(2x) - s(x) with s ramping 0 -> 1 on [1,2]; translates of the
    // log2 scalings telescope to s(2x) = 1 for x >= 1.
    d.v = [](double x) { return smoothstep(2.0 * x - 1.0) - smoothstep(x - 1.0); };
    return d;
}

cplx mellin_numeric(const std::function<cplx(double)>& f, cplx s, double lo, double hi) {
    if (!(0.0 < lo && lo < hi)) throw std::domain_error("mellin_numeric: bad support");
    auto integrand = [&](double x) -> cplx {
        cplx v = f(x);
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw std::domain_error("mellin_numeric: non-finite sample");
        return v * std::exp((s - cplx{1.0, 0.0}) * std::log(x));
    };
    return quad::integrate_c(integrand, lo, hi, 1e-10);
}

}  // namespace lowzero::testfn
