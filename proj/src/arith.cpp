#include "lowzero/arith.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace lowzero::arith {

Factorization factor(int64_t n) {
    if (n <= 0) throw std::domain_error("factor: n must be >= 1");
    Factorization f;
    f.n = n;
    int64_t m = n;
    for (int64_t p = 2; p * p <= m; p += (p == 2) ? 1 : 2) {
        if (m % p == 0) {
            int e = 0;
            while (m % p == 0) {
                m /= p;
                ++e;
            }
            f.factors.emplace_back(p, e);
        }
    }
    if (m > 1) f.factors.emplace_back(m, 1);
    return f;
}

int mobius(int64_t n) {
    auto f = factor(n);
    for (auto& [p, e] : f.factors)
        if (e > 1) return 0;
    return (f.factors.size() % 2 == 0) ? 1 : -1;
}

int64_t euler_phi(int64_t n) {
    auto f = factor(n);
    int64_t r = 1;
    for (auto& [p, e] : f.factors) {
        r *= p - 1;
        for (int i = 1; i < e; ++i) r *= p;
    }
    return r;
}

int64_t tau(int64_t n) {
    auto f = factor(n);
    int64_t r = 1;
    for (auto& [p, e] : f.factors) r *= e + 1;
    return r;
}

double von_mangoldt(int64_t n) {
    if (n <= 0) throw std::domain_error("von_mangoldt: n must be >= 1");
    if (n == 1) return 0.0;
    auto f = factor(n);
    if (f.factors.size() != 1) return 0.0;
    return std::log(static_cast<double>(f.factors[0].first));
}

int64_t radical(int64_t n) {
    auto f = factor(n);
    int64_t r = 1;
    for (auto& [p, e] : f.factors) r *= p;
    return r;
}

bool is_prime(int64_t n) {
    if (n < 2) return false;
    for (int64_t p = 2; p * p <= n; p += (p == 2) ? 1 : 2)
        if (n % p == 0) return false;
    return true;
}

std::vector<int64_t> divisors(int64_t n) {
    auto f = factor(n);
    std::vector<int64_t> ds{1};
    for (auto& [p, e] : f.factors) {
        size_t sz = ds.size();
        int64_t pe = 1;
        for (int i = 1; i <= e; ++i) {
            pe *= p;
            for (size_t j = 0; j < sz; ++j) ds.push_back(ds[j] * pe);
        }
    }
    std::sort(ds.begin(), ds.end());
    return ds;
}

std::vector<int64_t> primes_up_to(int64_t x) {
    std::vector<int64_t> ps;
    if (x < 2) return ps;
    std::vector<bool> sieve(static_cast<size_t>(x) + 1, true);
    for (int64_t i = 2; i <= x; ++i) {
        if (sieve[static_cast<size_t>(i)]) {
            ps.push_back(i);
            for (int64_t j = i * i; j <= x; j += i) sieve[static_cast<size_t>(j)] = false;
        }
    }
    return ps;
}

int64_t gcd64(int64_t a, int64_t b) { return std::gcd(a, b); }

int64_t mul_mod(int64_t a, int64_t b, int64_t m) {
    return static_cast<int64_t>(static_cast<__int128>(a) * b % m);
}

int64_t pow_mod(int64_t a, int64_t e, int64_t m) {
    if (m == 1) return 0;
    int64_t r = 1;
    a %= m;
    if (a < 0) a += m;
    while (e > 0) {
        if (e & 1) r = mul_mod(r, a, m);
        a = mul_mod(a, a, m);
        e >>= 1;
    }
    return r;
}

int64_t inverse_mod(int64_t x, int64_t c) {
    if (c <= 0) throw std::domain_error("inverse_mod: c must be >= 1");
    if (c == 1) return 0;
    x %= c;
    if (x < 0) x += c;
    int64_t r0 = c, r1 = x, t0 = 0, t1 = 1;
    while (r1 != 0) {
        int64_t q = r0 / r1;
        int64_t r2 = r0 - q * r1;
        int64_t t2 = t0 - q * t1;
        r0 = r1;
        r1 = r2;
        t0 = t1;
        t1 = t2;
    }
    if (r0 != 1) throw std::domain_error("inverse_mod: gcd(x,c) > 1");
    if (t0 < 0) t0 += c;
    return t0;
}

KloostermanTable::KloostermanTable(int64_t c) : c_(c) {
    if (c <= 0) throw std::domain_error("kloosterman: c must be >= 1");
    if (c > (int64_t{1} << 26))
        throw std::domain_error("kloosterman: modulus too large for table evaluation");
    if (c == 1) {
        x_.assign(1, 0);
        xinv_.assign(1, 0);
        cs_.assign(1, 1.0);
        sn_.assign(1, 0.0);
        return;
    }
    // e(j/c) by rotation, refreshed from libm every 64 steps
    size_t n = static_cast<size_t>(c);
    cs_.resize(n);
    sn_.resize(n);
    double wc = std::cos(two_pi / static_cast<double>(c));
    double ws = std::sin(two_pi / static_cast<double>(c));
    double zr = 1.0, zi = 0.0;
    for (size_t j = 0; j < n; ++j) {
        if (j % 64 == 0) {
            double a = two_pi * static_cast<double>(j) / static_cast<double>(c);
            zr = std::cos(a);
            zi = std::sin(a);
        }
        cs_[j] = zr;
        sn_[j] = zi;
        double nr = zr * wc - zi * ws;
        zi = zr * ws + zi * wc;
        zr = nr;
    }
    // units by sieving the prime factors
    std::vector<bool> coprime(n, true);
    coprime[0] = false;
    for (auto& [p, e] : factor(c).factors)
        for (int64_t j = 0; j < c; j += p) coprime[static_cast<size_t>(j)] = false;
    for (int64_t u = 1; u < c; ++u)
        if (coprime[static_cast<size_t>(u)]) x_.push_back(u);
    // batched inversion: one gcd inversion plus three multiplications per unit
    size_t m = x_.size();
    xinv_.resize(m);
    std::vector<int64_t> prefix(m);
    int64_t run = 1;
    for (size_t i = 0; i < m; ++i) {
        prefix[i] = run;
        run = mul_mod(run, x_[i], c);
    }
    int64_t inv_all = inverse_mod(run, c);
    for (size_t i = m; i-- > 0;) {
        xinv_[i] = mul_mod(inv_all, prefix[i], c);
        inv_all = mul_mod(inv_all, x_[i], c);
    }
}

double KloostermanTable::eval(int64_t m, int64_t n) const {
    double out;
    std::array<int64_t, 1> ms{m};
    batch(std::span<const int64_t>(ms.data(), 1), n, &out);
    return out;
}

void KloostermanTable::batch(std::span<const int64_t> ms, int64_t n, double* out) const {
    int64_t c = c_;
    if (c == 1) {
        for (size_t k = 0; k < ms.size(); ++k) out[k] = 1.0;
        return;
    }
    int64_t nr = n % c;
    if (nr < 0) nr += c;
    size_t u = x_.size();
    thread_local std::vector<int64_t> base;
    base.resize(u);
    for (size_t i = 0; i < u; ++i) base[i] = mul_mod(nr, xinv_[i], c);

    for (size_t k = 0; k < ms.size(); ++k) {
        int64_t mr = ms[k] % c;
        if (mr < 0) mr += c;
        kahan_sum re, im;
        for (size_t i = 0; i < u; ++i) {
            int64_t idx = (mr * x_[i] + base[i]) % c;
            re.add(cs_[static_cast<size_t>(idx)]);
            im.add(sn_[static_cast<size_t>(idx)]);
        }
        double scale = std::sqrt(static_cast<double>(c)) + 1.0;
        if (std::abs(im.value()) > 1e-9 * scale)
            throw std::runtime_error("kloosterman: imaginary residual " +
                                     std::to_string(im.value()));
        out[k] = re.value();
    }
}

double kloosterman(int64_t m, int64_t n, int64_t c) {
    return KloostermanTable(c).eval(m, n);
}

std::vector<double> kloosterman_batch(std::span<const int64_t> ms, int64_t n, int64_t c) {
    KloostermanTable t(c);
    std::vector<double> out(ms.size());
    t.batch(ms, n, out.data());
    return out;
}

double ramanujan_sum(int64_t n, int64_t c) { return kloosterman(n, 0, c); }

// ---- character group ------------------------------------------------------

namespace {

int64_t primitive_root_mod_p(int64_t p) {
    if (p == 2) return 1;
    int64_t phi = p - 1;
    auto f = factor(phi);
    for (int64_t g = 2; g < p; ++g) {
        bool ok = true;
        for (auto& [q, e] : f.factors) {
            if (pow_mod(g, phi / q, p) == 1) {
                ok = false;
                break;
            }
        }
        if (ok) return g;
    }
    throw std::logic_error("primitive_root_mod_p: not found");
}

}  // namespace

// One cyclic component of (Z/cZ)^*: generator g of order d modulo pe, with a
// discrete-log lookup table over the units of pe.
struct CyclicComponent {
    int64_t pe = 1;       // prime power modulus
    int64_t gen = 1;      // generator
    int64_t order = 1;    // order of gen
    std::vector<int32_t> dlog;  // dlog[x] for x in [0,pe), -1 off the subgroup hit

    CyclicComponent(int64_t pe_, int64_t gen_, int64_t order_)
        : pe(pe_), gen(gen_), order(order_), dlog(static_cast<size_t>(pe_), -1) {
        int64_t v = 1 % pe;
        for (int64_t j = 0; j < order; ++j) {
            dlog[static_cast<size_t>(v)] = static_cast<int32_t>(j);
            v = mul_mod(v, gen, pe);
        }
    }
};

class CharacterGroup : public std::enable_shared_from_this<CharacterGroup> {
public:
    explicit CharacterGroup(int64_t c) : modulus_(c) {
        if (c <= 0) throw std::domain_error("characters: modulus must be >= 1");
        auto f = factor(c);
        for (auto& [p, e] : f.factors) {
            int64_t pe = 1;
            for (int i = 0; i < e; ++i) pe *= p;
            if (p == 2) {
                if (e == 1) continue;  // trivial unit group
                if (e == 2) {
                    comps_.emplace_back(pe, 3, 2);
                } else {
                    comps_.emplace_back(pe, pe - 1, 2);  // <-1>
                    comps_.emplace_back(pe, 5, pe / 4);  // <5>
                }
            } else {
                int64_t g = primitive_root_mod_p(p);
                int64_t ord = euler_phi(pe);
                if (e > 1 && pow_mod(g, p - 1, p * p) == 1) g += p;
                comps_.emplace_back(pe, g, ord);
            }
        }
    }

    int64_t modulus() const { return modulus_; }
    const std::vector<CyclicComponent>& components() const { return comps_; }

    // exponent vector of x on the generators; false when gcd(x, c) > 1
    bool dlog(int64_t x, std::vector<int64_t>& out) const {
        out.clear();
        int64_t xr = x % modulus_;
        if (xr < 0) xr += modulus_;
        if (modulus_ == 1) return true;
        if (std::gcd(xr, modulus_) != 1) return false;
        for (size_t i = 0; i < comps_.size(); ++i) {
            const auto& cc = comps_[i];
            int64_t xm = xr % cc.pe;
            if (cc.pe >= 8 && cc.pe % 2 == 0 && cc.gen == cc.pe - 1) {
                // 2^e with e >= 3: x = (-1)^a 5^b; components appear as <-1>, <5>.
                const auto& c5 = comps_[i + 1];
                int32_t d5 = c5.dlog[static_cast<size_t>(xm)];
                if (d5 >= 0) {
                    out.push_back(0);
                    out.push_back(d5);
                } else {
                    d5 = c5.dlog[static_cast<size_t>(cc.pe - xm)];
                    if (d5 < 0) throw std::logic_error("dlog: 2-adic decomposition failed");
                    out.push_back(1);
                    out.push_back(d5);
                }
                ++i;
                continue;
            }
            int32_t d = cc.dlog[static_cast<size_t>(xm)];
            if (d < 0) throw std::logic_error("dlog: unit not generated");
            out.push_back(d);
        }
        return true;
    }

private:
    int64_t modulus_;
    std::vector<CyclicComponent> comps_;
};

DirichletCharacter::DirichletCharacter(std::shared_ptr<const CharacterGroup> g,
                                       std::vector<int> exps)
    : group_(std::move(g)), exps_(std::move(exps)) {}

int64_t DirichletCharacter::modulus() const { return group_->modulus(); }

bool DirichletCharacter::is_principal() const {
    return std::all_of(exps_.begin(), exps_.end(), [](int k) { return k == 0; });
}

cplx DirichletCharacter::operator()(int64_t x) const {
    thread_local std::vector<int64_t> dl;
    if (!group_->dlog(x, dl)) return {0.0, 0.0};
    const auto& comps = group_->components();
    // phase = sum_i exps_i * dlog_i / order_i  (mod 1), kept exact in rationals
    double phase = 0.0;
    for (size_t i = 0; i < comps.size(); ++i) {
        int64_t num = (static_cast<int64_t>(exps_[i]) * dl[i]) % comps[i].order;
        phase += static_cast<double>(num) / static_cast<double>(comps[i].order);
    }
    return e_of(phase);
}

DirichletCharacter DirichletCharacter::conjugate() const {
    const auto& comps = group_->components();
    std::vector<int> neg(exps_.size());
    for (size_t i = 0; i < exps_.size(); ++i)
        neg[i] = exps_[i] == 0 ? 0 : static_cast<int>(comps[i].order) - exps_[i];
    return DirichletCharacter(group_, std::move(neg));
}

DirichletCharacter DirichletCharacter::square() const {
    const auto& comps = group_->components();
    std::vector<int> sq(exps_.size());
    for (size_t i = 0; i < exps_.size(); ++i)
        sq[i] = static_cast<int>((2LL * exps_[i]) % comps[i].order);
    return DirichletCharacter(group_, std::move(sq));
}

bool DirichletCharacter::operator==(const DirichletCharacter& o) const {
    return modulus() == o.modulus() && exps_ == o.exps_;
}

int64_t DirichletCharacter::conductor() const {
    int64_t c = modulus();
    if (c == 1) return 1;
    // Smallest f | c with chi trivial on units congruent to 1 mod f.
    for (int64_t f : divisors(c)) {
        bool ok = true;
        for (int64_t x = 1; x <= c && ok; x += f) {
            if (std::gcd(x, c) != 1) continue;
            cplx v = (*this)(x);
            if (std::abs(v - cplx{1.0, 0.0}) > 1e-9) ok = false;
        }
        if (ok) return f;
    }
    return c;
}

std::vector<DirichletCharacter> characters(int64_t c) {
    auto group = std::make_shared<const CharacterGroup>(c);
    const auto& comps = group->components();
    std::vector<DirichletCharacter> out;
    std::vector<int> exps(comps.size(), 0);
    // lexicographic sweep over exponent vectors; principal character comes first
    while (true) {
        out.push_back(DirichletCharacter(group, exps));
        size_t i = 0;
        while (i < comps.size()) {
            if (++exps[i] < comps[i].order) break;
            exps[i] = 0;
            ++i;
        }
        if (i == comps.size()) break;
    }
    return out;
}

DirichletCharacter principal_character(int64_t c) {
    auto group = std::make_shared<const CharacterGroup>(c);
    return DirichletCharacter(group, std::vector<int>(group->components().size(), 0));
}

cplx gauss_sum(const DirichletCharacter& chi) {
    int64_t c = chi.modulus();
    if (c == 1) return {1.0, 0.0};
    kahan_csum acc;
    for (int64_t x = 1; x <= c; ++x) {
        cplx v = chi(x);
        if (v == cplx{0.0, 0.0}) continue;
        acc.add(v * e_of(static_cast<double>(x) / static_cast<double>(c)));
    }
    return acc.value();
}

}  // namespace lowzero::arith
