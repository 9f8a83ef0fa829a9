#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace lowzero {

using cplx = std::complex<double>;

inline constexpr double pi = 3.14159265358979323846264338327950288;
inline constexpr double two_pi = 2.0 * pi;

// e(x) = exp(2*pi*i*x), the additive character used by every exponential sum here.
inline cplx e_of(double x) {
    double a = two_pi * x;
    return {std::cos(a), std::sin(a)};
}

// Thrown when a requested certified error cannot be met within the configured caps.
// Carries the bound that *is* achievable so callers can retry.
class truncation_infeasible : public std::runtime_error {
public:
    truncation_infeasible(const std::string& msg, double achievable)
        : std::runtime_error(msg), achievable_(achievable) {}
    double achievable() const noexcept { return achievable_; }

private:
    double achievable_;
};

// Thrown by quadrature that failed to converge; carries the best estimate.
class accuracy_error : public std::runtime_error {
public:
    accuracy_error(const std::string& msg, double estimate, double err)
        : std::runtime_error(msg), estimate_(estimate), err_(err) {}
    double best_estimate() const noexcept { return estimate_; }
    double error_estimate() const noexcept { return err_; }

private:
    double estimate_;
    double err_;
};

class pole_error : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Neumaier-compensated accumulator; all long sums in the lab go through this.
class kahan_sum {
public:
    void add(double x) noexcept {
        double t = s_ + x;
        if (std::abs(s_) >= std::abs(x))
            c_ += (s_ - t) + x;
        else
            c_ += (x - t) + s_;
        s_ = t;
    }
    void operator+=(double x) noexcept { add(x); }
    double value() const noexcept { return s_ + c_; }

private:
    double s_ = 0.0;
    double c_ = 0.0;
};

class kahan_csum {
public:
    void add(cplx z) noexcept {
        re_.add(z.real());
        im_.add(z.imag());
    }
    void operator+=(cplx z) noexcept { add(z); }
    cplx value() const noexcept { return {re_.value(), im_.value()}; }

private:
    kahan_sum re_, im_;
};

// Double-double arithmetic (Dekker/Knuth), enough for cancellation-heavy series.
struct dd {
    double hi = 0.0;
    double lo = 0.0;

    dd() = default;
    dd(double h) : hi(h), lo(0.0) {}
    dd(double h, double l) : hi(h), lo(l) {}

    static dd two_sum(double a, double b) {
        double s = a + b;
        double bb = s - a;
        double err = (a - (s - bb)) + (b - bb);
        return {s, err};
    }
    static dd quick_two_sum(double a, double b) {
        double s = a + b;
        return {s, b - (s - a)};
    }
    static dd two_prod(double a, double b) {
        double p = a * b;
        return {p, std::fma(a, b, -p)};
    }

    friend dd operator+(dd a, dd b) {
        dd s = two_sum(a.hi, b.hi);
        s.lo += a.lo + b.lo;
        return quick_two_sum(s.hi, s.lo);
    }
    friend dd operator-(dd a, dd b) { return a + dd{-b.hi, -b.lo}; }
    friend dd operator*(dd a, dd b) {
        dd p = two_prod(a.hi, b.hi);
        p.lo += a.hi * b.lo + a.lo * b.hi;
        return quick_two_sum(p.hi, p.lo);
    }
    friend dd operator/(dd a, dd b) {
        double q1 = a.hi / b.hi;
        dd r = a - b * dd{q1};
        double q2 = r.hi / b.hi;
        r = r - b * dd{q2};
        double q3 = r.hi / b.hi;
        dd q = quick_two_sum(q1, q2);
        return q + dd{q3};
    }
    double to_double() const { return hi + lo; }
};

}  // namespace lowzero
