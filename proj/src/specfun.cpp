#include "lowzero/specfun.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <vector>

namespace lowzero::specfun {

namespace {

constexpr double kSeriesCut = 30.0;

// J_nu(x) = sum_l (-1)^l (x/2)^{nu+2l} / (l! (l+nu)!), summed in double-double.
// At x = 30 the alternating terms peak near e^30, which costs ~13 digits; the
// ~32 digits of dd leave plenty.
BesselEval series_eval(int nu, double x) {
    dd half(x * 0.5);
    dd term(1.0);
    for (int i = 1; i <= nu; ++i) term = term * half / dd(static_cast<double>(i));
    dd sum = term;
    dd x2 = half * half;
    double peak = std::abs(term.to_double());
    for (int l = 1; l <= 400; ++l) {
        term = term * x2 / dd(static_cast<double>(l) * (l + nu));
        term = dd(-term.hi, -term.lo);
        sum = sum + term;
        double t = std::abs(term.to_double());
        peak = std::max(peak, t);
        if (t < 1e-17 * std::max(1.0, std::abs(sum.to_double())) && l > x * 0.5) break;
    }
    BesselEval r;
    r.order = nu;
    r.value = sum.to_double();
    r.regime = BesselRegime::series;
    r.est_abs_error = peak * 1e-30 + 1e-300;
    return r;
}

// Hankel expansion: J_nu(x) = sqrt(2/(pi x)) [P cos w - Q sin w],
// w = x - nu pi/2 - pi/4.  Terms are summed while they decrease; the remainder
// is bounded by the first omitted term.
struct HankelResult {
    double p = 0.0, q = 0.0, min_term = 0.0;
};

HankelResult hankel_pq(int nu, double x) {
    double mu = 4.0 * static_cast<double>(nu) * nu;
    double t = 1.0;
    HankelResult r;
    r.p = 1.0;
    double prev = 1.0;
    for (int k = 1; k <= 60; ++k) {
        double odd = 2.0 * k - 1.0;
        t *= (mu - odd * odd) / (8.0 * x * k);
        if (std::abs(t) >= std::abs(prev) && k > 2) {
            r.min_term = std::abs(prev);
            return r;
        }
        if (k % 4 == 1)
            r.q += t;
        else if (k % 4 == 2)
            r.p -= t;
        else if (k % 4 == 3)
            r.q -= t;
        else
            r.p += t;
        prev = t;
        if (std::abs(t) < 1e-18) break;
    }
    r.min_term = std::abs(prev);
    return r;
}

BesselEval hankel_eval(int nu, double x) {
    auto pq = hankel_pq(nu, x);
    double w = x - (0.5 * nu + 0.25) * pi;
    double amp = std::sqrt(2.0 / (pi * x));
    BesselEval r;
    r.order = nu;
    r.value = amp * (pq.p * std::cos(w) - pq.q * std::sin(w));
    r.regime = BesselRegime::asymptotic;
    r.est_abs_error = amp * pq.min_term;
    return r;
}

// Backward recurrence with series normalization: start well above the order,
// run J_{k-1} = (2k/x) J_k - J_{k+1} downward, scale by J_0 + 2 sum J_{2k} = 1.
BesselEval miller_eval(int nu, double x) {
    int start = static_cast<int>(std::max<double>(nu, x)) +
                static_cast<int>(20.0 + 2.0 * std::sqrt(std::max<double>(nu, x)));
    if (start % 2 == 1) ++start;
    double jp = 0.0, j = 1e-280, norm = 0.0, result = 0.0;
    for (int k = start; k >= 1; --k) {
        double jm = (2.0 * k / x) * j - jp;
        jp = j;
        j = jm;
        if (k - 1 == nu) result = j;
        if ((k - 1) % 2 == 0) norm += (k - 1 == 0) ? j : 2.0 * j;
        if (std::abs(j) > 1e280) {
            j *= 1e-280;
            jp *= 1e-280;
            norm *= 1e-280;
            result *= 1e-280;
        }
    }
    BesselEval r;
    r.order = nu;
    r.value = result / norm;
    r.regime = BesselRegime::recurrence;
    r.est_abs_error = 1e-13 * std::max(1.0, std::abs(r.value));
    return r;
}

std::vector<double> hankel_cut_cache;  // indexed by order
std::mutex hankel_cut_mutex;

}  // namespace

double hankel_cut(int order) {
    {
        std::lock_guard<std::mutex> lock(hankel_cut_mutex);
        if (order < static_cast<int>(hankel_cut_cache.size()) && hankel_cut_cache[order] > 0.0)
            return hankel_cut_cache[order];
    }
    double lo = kSeriesCut, hi = kSeriesCut;
    while (hankel_pq(order, hi).min_term > 1e-13 && hi < 1e6) hi *= 1.5;
    for (int it = 0; it < 60; ++it) {
        double mid = 0.5 * (lo + hi);
        if (hankel_pq(order, mid).min_term > 1e-13)
            lo = mid;
        else
            hi = mid;
    }
    std::lock_guard<std::mutex> lock(hankel_cut_mutex);
    if (order >= static_cast<int>(hankel_cut_cache.size()))
        hankel_cut_cache.resize(order + 1, 0.0);
    hankel_cut_cache[order] = hi;
    return hi;
}

BesselEval bessel_j_via(int order, double x, BesselRegime regime) {
    if (order < 0) throw std::domain_error("bessel_j: order must be >= 0");
    if (x <= 0.0) throw std::domain_error("bessel_j_via: x must be > 0");
    switch (regime) {
        case BesselRegime::series:
            return series_eval(order, x);
        case BesselRegime::asymptotic:
            return hankel_eval(order, x);
        case BesselRegime::recurrence:
            return miller_eval(order, x);
    }
    throw std::logic_error("bessel_j_via: bad regime");
}

BesselEval bessel_j(int order, double x) {
    if (order < 0) throw std::domain_error("bessel_j: order must be >= 0");
    if (x < 0.0) throw std::domain_error("bessel_j: x must be >= 0");
    if (x == 0.0) {
        BesselEval r;
        r.order = order;
        r.value = order == 0 ? 1.0 : 0.0;
        r.regime = BesselRegime::series;
        r.est_abs_error = 0.0;
        return r;
    }
    if (x <= kSeriesCut) return series_eval(order, x);
    if (x >= hankel_cut(order)) return hankel_eval(order, x);
    return miller_eval(order, x);
}

double j_envelope(int k, double x) {
    if (!(x > 0.0)) throw std::domain_error("j_envelope: x must be > 0");
    if (k < 2 || k > envelope_max_k) throw std::domain_error("j_envelope: k out of [2,20]");
    double lo = 1.0 / std::sqrt(x);
    if (x < 1.0) lo = std::min(lo, std::pow(x, k - 1));
    return envelope_c * lo;
}

// Lanczos, g = 7, 9 coefficients.
cplx gamma_complex(cplx s) {
    static const std::array<double, 9> coef = {
        0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
        771.32342877765313,   -176.61502916214059,   12.507343278686905,
        -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};
    if (s.imag() == 0.0 && s.real() <= 0.0 && s.real() == std::floor(s.real()))
        throw pole_error("gamma_complex: pole at nonpositive integer");
    if (s.real() < 0.5) {
        // reflection: Gamma(s) Gamma(1-s) = pi / sin(pi s)
        cplx sp = std::sin(pi * s);
        if (std::abs(sp) == 0.0) throw pole_error("gamma_complex: pole");
        return pi / (sp * gamma_complex(cplx{1.0, 0.0} - s));
    }
    cplx z = s - cplx{1.0, 0.0};
    cplx x{coef[0], 0.0};
    for (int i = 1; i < 9; ++i) x += coef[i] / (z + cplx{static_cast<double>(i), 0.0});
    cplx t = z + cplx{7.5, 0.0};
    return std::sqrt(two_pi) * std::pow(t, z + cplx{0.5, 0.0}) * std::exp(-t) * x;
}

}  // namespace lowzero::specfun
