#include <cmath>
#include <complex>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "lowzero/arith.hpp"

using namespace lowzero;
using namespace lowzero::arith;

namespace {

// Definition-level oracles, independent of the library code paths.

int64_t phi_oracle(int64_t n) {
    int64_t cnt = 0;
    for (int64_t x = 1; x <= n; ++x)
        if (std::gcd(x, n) == 1) ++cnt;
    return cnt;
}

int64_t tau_oracle(int64_t n) {
    int64_t cnt = 0;
    for (int64_t d = 1; d <= n; ++d)
        if (n % d == 0) ++cnt;
    return cnt;
}

int mobius_oracle(int64_t n) {
    int k = 0;
    for (int64_t p = 2; p <= n; ++p) {
        if (n % p != 0) continue;
        if (n % (p * p) == 0) return 0;
        n /= p;
        ++k;
    }
    return k % 2 == 0 ? 1 : -1;
}

cplx kloosterman_oracle(int64_t m, int64_t n, int64_t c) {
    cplx s{0.0, 0.0};
    for (int64_t x = (c == 1 ? 0 : 1); x < std::max<int64_t>(c, 1); ++x) {
        if (std::gcd(x, c) != 1) continue;
        int64_t xin = inverse_mod(x, c);
        double arg = two_pi * (static_cast<double>(m % c) * x + static_cast<double>(n % c) * xin) /
                     static_cast<double>(c);
        s += cplx{std::cos(arg), std::sin(arg)};
    }
    if (c == 1) s = {1.0, 0.0};
    return s;
}

}  // namespace

TEST_CASE("factor basics") {
    CHECK(factor(1).factors.empty());
    auto f12 = factor(12);
    REQUIRE(f12.factors.size() == 2);
    CHECK(f12.factors[0] == std::pair<int64_t, int>{2, 2});
    CHECK(f12.factors[1] == std::pair<int64_t, int>{3, 1});
    auto f720 = factor(720);
    REQUIRE(f720.factors.size() == 3);
    CHECK(f720.factors[0] == std::pair<int64_t, int>{2, 4});
    CHECK(f720.factors[1] == std::pair<int64_t, int>{3, 2});
    CHECK(f720.factors[2] == std::pair<int64_t, int>{5, 1});
    CHECK_THROWS_AS(factor(0), std::domain_error);

    for (int64_t n = 1; n <= 500; ++n) {
        auto f = factor(n);
        int64_t prod = 1;
        int64_t last = 1;
        for (auto& [p, e] : f.factors) {
            CHECK(p > last);
            last = p;
            CHECK(is_prime(p));
            for (int i = 0; i < e; ++i) prod *= p;
        }
        CHECK(prod == n);
    }
}

TEST_CASE("multiplicative functions against brute force") {
    CHECK(mobius(1) == 1);
    CHECK(mobius(12) == 0);
    CHECK(euler_phi(10) == 4);
    CHECK(von_mangoldt(8) == doctest::Approx(std::log(2.0)));
    CHECK(von_mangoldt(6) == 0.0);
    for (int64_t n = 1; n <= 300; ++n) {
        CHECK(euler_phi(n) == phi_oracle(n));
        CHECK(tau(n) == tau_oracle(n));
        CHECK(mobius(n) == mobius_oracle(n));
    }
    CHECK_THROWS_AS(mobius(0), std::domain_error);
}

TEST_CASE("inverse_mod") {
    CHECK(inverse_mod(3, 7) == 5);
    CHECK(inverse_mod(1, 1) == 0);
    int64_t y = inverse_mod(10, 97);
    CHECK((10 * y) % 97 == 1);
    CHECK_THROWS_AS(inverse_mod(6, 9), std::domain_error);
    for (int64_t c = 1; c <= 60; ++c)
        for (int64_t x = 1; x < c; ++x) {
            if (std::gcd(x, c) != 1) continue;
            int64_t inv = inverse_mod(x, c);
            CHECK((x * inv) % c == 1 % c);
        }
}

TEST_CASE("kloosterman: trivial and hand cases") {
    CHECK(kloosterman(5, 7, 1) == doctest::Approx(1.0));
    CHECK(kloosterman(1, 1, 3) == doctest::Approx(-1.0).epsilon(1e-12));
    // against the definitional oracle
    for (int64_t c = 1; c <= 40; ++c)
        for (int64_t m : {0LL, 1LL, 2LL, 7LL})
            for (int64_t n : {0LL, 1LL, 5LL}) {
                cplx o = kloosterman_oracle(m, n, c);
                CHECK(std::abs(o.imag()) < 1e-9);
                CHECK(kloosterman(m, n, c) == doctest::Approx(o.real()).epsilon(1e-10));
            }
}

TEST_CASE("kloosterman: Kluyver S(1,0;c) = mu(c)") {
    for (int64_t c = 1; c <= 200; ++c)
        CHECK(kloosterman(1, 0, c) == doctest::Approx(static_cast<double>(mobius(c))).epsilon(1e-9));
}

TEST_CASE("ramanujan sum") {
    CHECK(ramanujan_sum(2, 4) == doctest::Approx(-2.0));
    for (int64_t c = 1; c <= 60; ++c)
        for (int64_t n = 1; n <= 20; ++n) {
            double v = ramanujan_sum(n, c);
            CHECK(std::abs(v) <= std::gcd(n, c) + 1e-9);
            CHECK(v == doctest::Approx(kloosterman(n, 0, c)));
        }
    // S(p,0;b0) = mu(b0) for p not dividing b0
    for (int64_t b0 : {1LL, 2LL, 3LL, 6LL, 10LL, 30LL, 42LL})
        for (int64_t p : {7LL, 11LL, 13LL}) {
            if (b0 % p == 0) continue;
            CHECK(ramanujan_sum(p, b0) ==
                  doctest::Approx(static_cast<double>(mobius(b0))).epsilon(1e-9));
        }
}

TEST_CASE("kloosterman: Weil bound and symmetry") {
    for (int64_t c = 1; c <= 60; ++c)
        for (int64_t m = 1; m <= 30; m += 3)
            for (int64_t n = 1; n <= 30; n += 4) {
                double s = kloosterman(m, n, c);
                double weil = static_cast<double>(tau(c)) *
                              std::sqrt(static_cast<double>(std::gcd(std::gcd(m, n), c))) *
                              std::sqrt(static_cast<double>(c));
                CHECK(std::abs(s) <= weil + 1e-9);
                CHECK(s == doctest::Approx(kloosterman(n, m, c)).epsilon(1e-10));
            }
}

TEST_CASE("kloosterman: Selberg identity") {
    for (int64_t c = 1; c <= 60; ++c)
        for (int64_t m = 1; m <= 30; m += 5)
            for (int64_t n = 1; n <= 30; n += 7) {
                double lhs = kloosterman(m, n, c);
                kahan_sum rhs;
                int64_t g = std::gcd(std::gcd(m, n), c);
                for (int64_t d = 1; d <= g; ++d) {
                    if (g % d != 0) continue;
                    rhs.add(d * kloosterman(m * n / (d * d), 1, c / d));
                }
                CHECK(std::abs(lhs - rhs.value()) < 1e-9);
            }
}

TEST_CASE("kloosterman: twisted multiplicativity") {
    for (int64_t c1 = 2; c1 <= 12; ++c1)
        for (int64_t c2 = 2; c2 <= 12; ++c2) {
            if (std::gcd(c1, c2) != 1 || c1 * c2 > 100) continue;
            for (int64_t m : {1LL, 2LL, 5LL})
                for (int64_t n : {1LL, 3LL}) {
                    int64_t c2b = inverse_mod(c2 % c1, c1);
                    int64_t c1b = inverse_mod(c1 % c2, c2);
                    int64_t m1 = (m % c1) * c2b % c1 * c2b % c1;  // m * c2bar^2 mod c1
                    int64_t m2 = (m % c2) * c1b % c2 * c1b % c2;
                    double lhs = kloosterman(m, n, c1 * c2);
                    double rhs = kloosterman(m1, n, c1) * kloosterman(m2, n, c2);
                    CHECK(std::abs(lhs - rhs) < 1e-8 * (1.0 + std::abs(lhs)));
                }
        }
}

TEST_CASE("kloosterman_batch agrees with single evaluations") {
    std::vector<int64_t> ms{1, 2, 3, 5, 8, 13, 21, 34};
    for (int64_t c : {12LL, 35LL, 64LL, 97LL}) {
        auto batch = kloosterman_batch(ms, 4, c);
        for (size_t i = 0; i < ms.size(); ++i)
            CHECK(batch[i] == doctest::Approx(kloosterman(ms[i], 4, c)).epsilon(1e-12));
    }
}

TEST_CASE("characters: counting and orthogonality") {
    auto c1 = characters(1);
    REQUIRE(c1.size() == 1);
    CHECK(c1[0](5) == cplx{1.0, 0.0});
    CHECK(c1[0].is_principal());

    for (int64_t c : {2LL, 3LL, 4LL, 5LL, 8LL, 12LL, 15LL, 16LL, 24LL, 36LL, 60LL}) {
        auto chs = characters(c);
        CHECK(static_cast<int64_t>(chs.size()) == euler_phi(c));
        int principal = 0;
        for (auto& ch : chs) {
            if (ch.is_principal()) ++principal;
            // complete multiplicativity on a sample
            for (int64_t a : {2LL, 3LL, 7LL})
                for (int64_t b : {5LL, 11LL}) {
                    cplx lhs = ch(a * b);
                    cplx rhs = ch(a) * ch(b);
                    CHECK(std::abs(lhs - rhs) < 1e-10);
                }
            // sum over x of chi(x): phi(c) for principal, 0 otherwise
            kahan_csum sum;
            for (int64_t x = 1; x <= c; ++x) sum.add(ch(x));
            double expect = ch.is_principal() ? static_cast<double>(euler_phi(c)) : 0.0;
            CHECK(std::abs(sum.value() - cplx{expect, 0.0}) < 1e-9);
        }
        CHECK(principal == 1);
    }
}

TEST_CASE("characters: sum over chi of chi(a) detects a = 1") {
    for (int64_t c : {3LL, 5LL, 8LL, 12LL, 36LL, 60LL}) {
        auto chs = characters(c);
        for (int64_t a = 1; a <= c; ++a) {
            if (std::gcd(a, c) != 1) continue;
            kahan_csum sum;
            for (auto& ch : chs) sum.add(ch(a));
            double expect = (a % c == 1 % c) ? static_cast<double>(euler_phi(c)) : 0.0;
            CHECK(std::abs(sum.value() - cplx{expect, 0.0}) < 1e-9);
        }
    }
}

TEST_CASE("conductor: induced character mod 8 from mod 4") {
    auto chs8 = characters(8);
    auto chs4 = characters(4);
    const DirichletCharacter* nontriv4 = nullptr;
    for (auto& ch : chs4)
        if (!ch.is_principal()) nontriv4 = &ch;
    REQUIRE(nontriv4 != nullptr);
    // the mod-8 character agreeing with it on units has conductor 4
    int found = 0;
    for (auto& ch : chs8) {
        bool agrees = true;
        for (int64_t x : {1LL, 3LL, 5LL, 7LL})
            if (std::abs(ch(x) - (*nontriv4)(x)) > 1e-12) agrees = false;
        if (agrees) {
            ++found;
            CHECK(ch.conductor() == 4);
        }
    }
    CHECK(found == 1);
}

TEST_CASE("conjugate and square exponents") {
    for (auto& ch : characters(35)) {
        auto conj = ch.conjugate();
        auto sq = ch.square();
        for (int64_t x : {2LL, 3LL, 4LL, 8LL, 9LL}) {
            CHECK(std::abs(conj(x) - std::conj(ch(x))) < 1e-12);
            CHECK(std::abs(sq(x) - ch(x) * ch(x)) < 1e-12);
        }
    }
}

TEST_CASE("gauss sums: primitive characters have |tau| = sqrt(c)") {
    CHECK(std::abs(gauss_sum(characters(1)[0]) - cplx{1.0, 0.0}) < 1e-14);
    // quadratic character mod 5 has tau = sqrt(5)
    for (auto& ch : characters(5)) {
        bool quad = !ch.is_principal() && std::abs(ch(2) - cplx{-1.0, 0.0}) < 1e-12;
        if (quad) CHECK(std::abs(gauss_sum(ch) - cplx{std::sqrt(5.0), 0.0}) < 1e-10);
    }
    for (int64_t c = 1; c <= 100; ++c)
        for (auto& ch : characters(c)) {
            if (ch.conductor() != c) continue;
            CHECK(std::abs(std::abs(gauss_sum(ch)) - std::sqrt(static_cast<double>(c))) < 1e-10);
        }
}
