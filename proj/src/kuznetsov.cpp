#include "lowzero/kuznetsov.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "lowzero/quadrature.hpp"
#include "lowzero/specfun.hpp"

namespace lowzero::kuznetsov {

namespace {

double smoothstep(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    return 1.0 / (1.0 + std::exp(1.0 / t - 1.0 / (1.0 - t)));
}

// J_{k-1} and nearby orders, with J_{-n} = (-1)^n J_n.
double bessel_signed(int order, double x) {
    if (order >= 0) return specfun::bessel_j(order, x).value;
    double v = specfun::bessel_j(-order, x).value;
    return (-order) % 2 == 0 ? v : -v;
}

// n-th derivative of J_nu via J' = (J_{nu-1} - J_{nu+1})/2.
double bessel_deriv(int nu, int n, double x) {
    double acc = 0.0;
    for (int j = 0; j <= n; ++j) {
        double binom = 1.0;
        for (int i = 1; i <= j; ++i) binom = binom * (n - i + 1) / i;
        double sgn = (j % 2 == 0) ? 1.0 : -1.0;
        acc += binom * sgn * bessel_signed(nu - n + 2 * j, x);
    }
    return std::ldexp(acc, -n);
}

}  // namespace

void validate(const KernelSpec& spec) {
    if (spec.k % 2 != 0 || spec.k < 4 || spec.k > specfun::envelope_max_k)
        throw std::domain_error("KernelSpec: k must be even, 4 <= k <= 20");
    if (!(spec.X > 0.0)) throw std::domain_error("KernelSpec: X must be > 0");
    if (!(0.0 < spec.a && spec.a < spec.a1 && spec.a1 < spec.b1 && spec.b1 < spec.b))
        throw std::domain_error("KernelSpec: need 0 < a < a1 < b1 < b");
}

double window(const KernelSpec& spec, double y) {
    if (y <= spec.a || y >= spec.b) return 0.0;
    if (y < spec.a1) return smoothstep((y - spec.a) / (spec.a1 - spec.a));
    if (y <= spec.b1) return 1.0;
    return smoothstep((spec.b - y) / (spec.b - spec.b1));
}

cplx h_u_eval(const KernelSpec& spec, double xi) {
    validate(spec);
    if (!(xi > 0.0)) throw std::domain_error("h_u_eval: xi must be > 0");
    double w = window(spec, xi / spec.X);
    if (w == 0.0) return {0.0, 0.0};
    return specfun::bessel_j(spec.k - 1, xi).value * w * e_of(spec.u * xi);
}

namespace {

// L1 norms of the first derivatives of g(x) = h_u(x)/x, used for the
// integration-by-parts tail bounds of the Mehler-Sonine y-integral.
// J-derivatives are exact (recurrence); window derivatives by central
// differences; the 1/x and phase factors are closed-form.
std::array<double, 7> amplitude_deriv_norms(const KernelSpec& spec) {
    validate(spec);
    const int jmax = 6;
    double lo = spec.a * spec.X, hi = spec.b * spec.X;
    double ramp = std::min(spec.a1 - spec.a, spec.b - spec.b1);
    double hw = ramp / 256.0;

    auto wderiv = [&](double y, int n) {
        if (n == 0) return window(spec, y);
        double acc = 0.0;
        for (int i = 0; i <= n; ++i) {
            double binom = 1.0;
            for (int t = 1; t <= i; ++t) binom = binom * (n - t + 1) / t;
            double sgn = (i % 2 == 0) ? 1.0 : -1.0;
            acc += binom * sgn * window(spec, y + (0.5 * n - i) * hw);
        }
        return acc / std::pow(hw, n);
    };

    std::array<double, 7> out{};
    const int panels = 96;
    for (int j = 0; j <= jmax; ++j) {
        kahan_sum norm;
        for (int pnl = 0; pnl < panels; ++pnl) {
            double pa = lo + (hi - lo) * pnl / panels;
            double pb = lo + (hi - lo) * (pnl + 1) / panels;
            double mid = 0.5 * (pa + pb), half = 0.5 * (pb - pa);
            for (int node = 0; node < 15; ++node) {
                double x = mid + half * quad::GL15::x[node];
                // Leibniz over J * W(./X) * e(ux) * 1/x
                cplx d{0.0, 0.0};
                for (int n1 = 0; n1 + 0 <= j; ++n1)
                    for (int n2 = 0; n1 + n2 <= j; ++n2)
                        for (int n3 = 0; n1 + n2 + n3 <= j; ++n3) {
                            int n4 = j - n1 - n2 - n3;
                            // multinomial j! / (n1! n2! n3! n4!)
                            auto fact = [](int n) {
                                double f = 1.0;
                                for (int t = 2; t <= n; ++t) f *= t;
                                return f;
                            };
                            double multi =
                                fact(j) / (fact(n1) * fact(n2) * fact(n3) * fact(n4));
                            double jpart = bessel_deriv(spec.k - 1, n1, x);
                            double wpart =
                                wderiv(x / spec.X, n2) / std::pow(spec.X, n2);
                            cplx phase = std::pow(cplx{0.0, two_pi * spec.u}, n3) *
                                         e_of(spec.u * x);
                            double invx = std::pow(-1.0, n4) * fact(n4) /
                                          std::pow(x, n4 + 1);
                            d += multi * jpart * wpart * phase * invx;
                        }
                norm.add(half * quad::GL15::w[node] * std::abs(d));
            }
        }
        out[j] = 1.5 * norm.value();  // slack over the FD window derivatives
    }
    return out;
}

struct AmplitudeCache {
    std::vector<double> x;
    std::vector<cplx> amp;  // weight * g(x)
};

AmplitudeCache build_amplitude(const KernelSpec& spec, double omega_cap, double refine) {
    double lo = spec.a * spec.X, hi = spec.b * spec.X;
    double h = std::min((hi - lo) / 8.0, 10.0 / omega_cap) / refine;
    auto n_panels = static_cast<size_t>(std::ceil((hi - lo) / h));
    if (n_panels > 400000)
        throw accuracy_error("phi_plus: oscillation outruns the quadrature budget", 0.0,
                             static_cast<double>(n_panels));
    AmplitudeCache cache;
    cache.x.reserve(n_panels * 15);
    cache.amp.reserve(n_panels * 15);
    for (size_t p = 0; p < n_panels; ++p) {
        double pa = lo + (hi - lo) * static_cast<double>(p) / static_cast<double>(n_panels);
        double pb = lo + (hi - lo) * static_cast<double>(p + 1) / static_cast<double>(n_panels);
        double mid = 0.5 * (pa + pb), half = 0.5 * (pb - pa);
        for (int node = 0; node < 15; ++node) {
            double x = mid + half * quad::GL15::x[node];
            double w = window(spec, x / spec.X);
            if (w == 0.0) continue;
            cplx g = specfun::bessel_j(spec.k - 1, x).value * w * e_of(spec.u * x) / x;
            cache.x.push_back(x);
            cache.amp.push_back(half * quad::GL15::w[node] * g);
        }
    }
    return cache;
}

cplx inner_x_integral(const AmplitudeCache& cache, double coshy) {
    kahan_csum acc;
    for (size_t i = 0; i < cache.x.size(); ++i)
        acc.add(cache.amp[i] * std::cos(cache.x[i] * coshy));
    return acc.value();
}

}  // namespace

cplx phi_plus(const KernelSpec& spec, cplx z) { return phi_plus(spec, z, 1.0); }

cplx phi_plus(const KernelSpec& spec, cplx z, double refine) {
    validate(spec);
    double delta = std::abs(z.imag());
    if (delta >= 0.5)
        throw std::domain_error("phi_plus: |Im z| must be < 1/2 for convergence");
    const double tol = 1e-8;
    auto D = amplitude_deriv_norms(spec);

    // truncation point of the y-integral from the IBP envelopes
    // |I(y)| <= D_j / cosh(y)^j and |cos(2zy)| <= e^{2 delta y}
    double ystar = 40.0;
    bool found = false;
    for (double y = 1.0; y <= 40.0 && !found; y += 0.125) {
        double best = 1e308;
        for (int j = 1; j <= 6; ++j) {
            double rate = static_cast<double>(j) - 2.0 * delta;
            double tail = std::pow(2.0, j) * D[j] * std::exp(-rate * y) / rate;
            best = std::min(best, tail);
        }
        if (best < 0.5 * tol) {
            ystar = y;
            found = true;
        }
    }
    if (!found)
        throw accuracy_error("phi_plus: y-tail does not certify at the cap", 0.0, 1.0);

    double omega_cap = std::cosh(ystar) + two_pi * std::abs(spec.u) + 2.0;
    AmplitudeCache cache = build_amplitude(spec, omega_cap, refine);

    // y integration with oscillation-aware panel widths
    kahan_csum total;
    double bX = spec.b * spec.X;
    double y = 0.0;
    while (y < ystar) {
        double rate_here = bX * std::cosh(std::min(y + 0.35, ystar)) + 2.0 * std::abs(z) + 1.0;
        double h = std::min(0.35, 10.0 / rate_here) / refine;
        h = std::min(h, ystar - y);
        double mid = y + 0.5 * h, half = 0.5 * h;
        for (int node = 0; node < 15; ++node) {
            double yy = mid + half * quad::GL15::x[node];
            cplx iy = inner_x_integral(cache, std::cosh(yy));
            total.add(half * quad::GL15::w[node] * iy * std::cos(2.0 * z * yy));
        }
        y += h;
    }
    return 8.0 * total.value();
}

cplx phi_h(const KernelSpec& spec, int l) {
    validate(spec);
    if (l < 2 || l % 2 != 0) throw std::domain_error("phi_h: l must be even and >= 2");
    double lo = spec.a * spec.X, hi = spec.b * spec.X;
    auto integrand = [&](double xi) -> cplx {
        double w = window(spec, xi / spec.X);
        if (w == 0.0) return {0.0, 0.0};
        return specfun::bessel_j(l - 1, xi).value * specfun::bessel_j(spec.k - 1, xi).value * w *
               e_of(spec.u * xi) / xi;
    };
    cplx integral = quad::integrate_c(integrand, lo, hi, 1e-10);
    double ik = (spec.k / 2) % 2 == 0 ? 1.0 : -1.0;  // i^k for even k
    return 4.0 * ik * integral;
}

double separated_H(const SeparatedKernel& sk, double xi, double lambda) {
    if (!(xi > 0.0) || !(lambda > 0.0))
        throw std::domain_error("separated_H: xi, lambda must be > 0");
    double r = sk.X / xi * std::sqrt(lambda);
    double psi = sk.psi.psi(r);
    if (psi == 0.0) return 0.0;
    double arg = r * sk.Q;
    if (arg <= 1.0) throw std::domain_error("separated_H: log argument <= 1");
    double lq = std::log(sk.Q);
    double denom = std::log(arg);
    return psi * lq / denom * sk.phi.phi_hat((std::log(lambda) + std::log(sk.P)) / denom);
}

cplx hat_H(const SeparatedKernel& sk, double u, double v) {
    // lambda runs over the dyadic window range [1/2, 3]; xi over the induced
    // support of Psi((X/xi) sqrt(lambda))
    double lam_lo = 0.5, lam_hi = 3.0;
    double xi_lo = sk.X * std::sqrt(lam_lo) / sk.psi.b;
    double xi_hi = sk.X * std::sqrt(lam_hi) / sk.psi.a;
    auto outer = [&](double lambda) -> cplx {
        auto inner = [&](double xi) -> cplx {
            double h = separated_H(sk, xi, lambda);
            if (h == 0.0) return {0.0, 0.0};
            return h * e_of(-xi * u - lambda * v);
        };
        return quad::integrate_c(inner, xi_lo, xi_hi, 1e-10);
    };
    return quad::integrate_c(outer, lam_lo, lam_hi, 1e-9);
}

HPlusBoundReport verify_hplus_bounds(const std::vector<double>& xs, const std::vector<double>& us,
                                     const std::vector<double>& rs,
                                     const std::vector<double>& deltas, int k) {
    HPlusBoundReport rep;
    const double eps = 0.1;
    for (double X : xs)
        for (double u : us) {
            KernelSpec spec;
            spec.k = k;
            spec.X = X;
            spec.u = u;
            double F = (1.0 + std::abs(u)) * (1.0 + X);
            double mn = std::min(std::pow(X, k - 1), 1.0 / std::sqrt(X));
            for (double r : rs) {
                cplx val = phi_plus(spec, {r, 0.0});
                double env = (1.0 + std::abs(std::log(X))) / std::pow(F, 1.0 - eps) *
                             std::pow(F / (1.0 + std::abs(r)), 2.0) * mn;
                BoundCase bc{X, u, r, std::abs(val), env, std::abs(val) / env};
                rep.lemma34_1.push_back(bc);
                rep.max_ratio_34 = std::max(rep.max_ratio_34, bc.ratio);
            }
            for (double d : deltas) {
                cplx val = phi_plus(spec, {0.0, d});
                double env = (1.0 + std::abs(u)) *
                             std::min(std::pow(X, k - 1.0 - 2.0 * std::abs(d)),
                                      1.0 / std::sqrt(X));
                BoundCase bc{X, u, d, std::abs(val), env, std::abs(val) / env};
                rep.lemma86.push_back(bc);
                rep.max_ratio_86 = std::max(rep.max_ratio_86, bc.ratio);
            }
        }
    return rep;
}

}  // namespace lowzero::kuznetsov
