#pragma once

// Exact integer arithmetic, multiplicative functions, and the complete
// exponential sums (Kloosterman, Ramanujan, Gauss) the trace formulas consume.

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "lowzero/common.hpp"

namespace lowzero::arith {

using std::int64_t;
using std::uint64_t;

struct Factorization {
    int64_t n = 1;
    std::vector<std::pair<int64_t, int>> factors;  // (prime, exponent), primes increasing
};

Factorization factor(int64_t n);

int mobius(int64_t n);
int64_t euler_phi(int64_t n);
int64_t tau(int64_t n);                  // number of divisors
double von_mangoldt(int64_t n);          // log p if n = p^l, else 0
int64_t radical(int64_t n);              // product of distinct primes
bool is_prime(int64_t n);
std::vector<int64_t> divisors(int64_t n);  // increasing
std::vector<int64_t> primes_up_to(int64_t x);

int64_t gcd64(int64_t a, int64_t b);
int64_t mul_mod(int64_t a, int64_t b, int64_t m);
int64_t pow_mod(int64_t a, int64_t e, int64_t m);

// y in [0,c) with x*y == 1 (mod c); c = 1 gives 0. Throws if gcd(x,c) > 1.
int64_t inverse_mod(int64_t x, int64_t c);

// S(m,n;c) = sum over units x mod c of e((m x + n x~)/c).  Real by x <-> -x.
// Direct O(c) summation with a precomputed root-of-unity table.
double kloosterman(int64_t m, int64_t n, int64_t c);

// Same sums for many m at a fixed (n, c); one inverse table serves all of them.
std::vector<double> kloosterman_batch(std::span<const int64_t> ms, int64_t n, int64_t c);

// Precomputed tables for a fixed modulus: unit list (sieved), all unit
// inverses (batched inversion), and e(j/c).  Lets one modulus serve many
// (m, n) pairs.
class KloostermanTable {
public:
    explicit KloostermanTable(int64_t c);
    int64_t modulus() const { return c_; }
    int64_t unit_count() const { return static_cast<int64_t>(x_.size()); }
    double eval(int64_t m, int64_t n) const;
    // out[k] = S(ms[k], n; c)
    void batch(std::span<const int64_t> ms, int64_t n, double* out) const;

private:
    int64_t c_;
    std::vector<double> cs_, sn_;
    std::vector<int64_t> x_, xinv_;
};

// S(n,0;c), evaluable by Kluyver's formula; |value| <= gcd(n,c).
double ramanujan_sum(int64_t n, int64_t c);

// ---- Dirichlet characters -------------------------------------------------

// Unit group (Z/cZ)^* split by CRT into cyclic pieces: odd prime powers get a
// primitive root; 2^e (e >= 3) gets <-1, 5>.
class CharacterGroup;

class DirichletCharacter {
public:
    int64_t modulus() const;
    bool is_principal() const;
    std::vector<int> exponents() const { return exps_; }

    cplx operator()(int64_t x) const;  // 0 off the units
    DirichletCharacter conjugate() const;
    DirichletCharacter square() const;
    int64_t conductor() const;

    bool operator==(const DirichletCharacter& o) const;

private:
    friend class CharacterGroup;
    friend std::vector<DirichletCharacter> characters(int64_t);
    friend DirichletCharacter principal_character(int64_t);
    DirichletCharacter(std::shared_ptr<const CharacterGroup> g, std::vector<int> exps);

    std::shared_ptr<const CharacterGroup> group_;
    std::vector<int> exps_;  // one exponent per cyclic generator
};

// All phi(c) characters mod c, principal first, deterministic order.
std::vector<DirichletCharacter> characters(int64_t c);
DirichletCharacter principal_character(int64_t c);

// tau(chi) = sum over x mod c of chi(x) e(x/c); |tau(chi)| = sqrt(c) for primitive chi.
cplx gauss_sum(const DirichletCharacter& chi);

}  // namespace lowzero::arith
