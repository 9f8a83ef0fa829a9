#include "lowzero/petersson.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <stdexcept>

#include "lowzero/arith.hpp"
#include "lowzero/specfun.hpp"

namespace lowzero::petersson {

void validate(const FamilyParams& p) {
    if (p.q < 1) throw std::domain_error("FamilyParams: q must be >= 1");
    if (p.k % 2 != 0 || p.k < 4)
        throw std::domain_error("FamilyParams: k must be even and >= 4 (odd weights have trivial S_k)");
    if (p.k > specfun::envelope_max_k)
        throw std::domain_error("FamilyParams: k exceeds the certified envelope range (k <= 20)");
}

std::pair<int64_t, int64_t> decompose_q(int64_t q) {
    if (q < 1) throw std::domain_error("decompose_q: q must be >= 1");
    auto f = arith::factor(q);
    int64_t q1 = 1, q2 = 1;
    for (auto& [p, e] : f.factors) {
        if (e >= 2) {
            int64_t pe = 1;
            for (int i = 0; i < e; ++i) pe *= p;
            q1 *= pe;
        } else {
            q2 *= p;
        }
    }
    return {q1, q2};
}

std::vector<NgTerm> ng_terms(int64_t q) {
    auto [q1, q2] = decompose_q(q);
    std::vector<int64_t> l1s = arith::divisors(arith::radical(q1));
    std::vector<int64_t> l2s = arith::divisors(q2);
    std::vector<NgTerm> out;
    for (int64_t L1 : l1s)
        for (int64_t L2 : l2s) {
            NgTerm t;
            t.L1 = L1;
            t.L2 = L2;
            t.d = q / (L1 * L2);
            t.mu = arith::mobius(L1 * L2);
            double euler = 1.0;
            for (auto& [p, e] : arith::factor(L1).factors) {
                bool p2_div_d = (t.d % (p * p) == 0);
                if (!p2_div_d) euler /= 1.0 - 1.0 / (static_cast<double>(p) * p);
            }
            t.euler = euler;
            out.push_back(t);
        }
    return out;
}

namespace {

double sum_tau_upper(double x) {  // sum_{c<=x} tau(c) <= x (log x + 1)
    if (x < 1.0) return 0.0;
    return x * (std::log(x) + 1.0);
}

// sum_{c>C} tau(c) c^{-s} <= s C^{1-s} ((log C + 1)/(s-1) + 1/(s-1)^2), C >= 1.
double tau_zeta_tail(double s, double C) {
    double C1 = std::max(C, 1.0);
    return s * std::pow(C1, 1.0 - s) *
           ((std::log(C1) + 1.0) / (s - 1.0) + 1.0 / ((s - 1.0) * (s - 1.0)));
}

struct GeomContext {
    int k;
    int64_t M;        // modulus multiplier: the c-sum runs over cM
    double A;         // 4 pi sqrt(m n)
    double sqrt_gcd;  // sqrt(gcd(m, n))
    double tauM;
    int64_t C0;       // first index from which the envelope power branch covers all c
};

GeomContext make_geom(int k, int64_t M, int64_t m, int64_t n) {
    GeomContext g;
    g.k = k;
    g.M = M;
    g.A = 2.0 * two_pi * std::sqrt(static_cast<double>(m) * static_cast<double>(n));
    g.sqrt_gcd = std::sqrt(static_cast<double>(std::gcd(m, n)));
    g.tauM = static_cast<double>(arith::tau(M));
    g.C0 = std::max<int64_t>(1, static_cast<int64_t>(std::ceil(g.A / static_cast<double>(M))));
    return g;
}

// Certified bound on sum_{c > C} |term(c)| for C >= C0.
double power_tail(const GeomContext& g, int64_t C) {
    double s = g.k - 0.5;
    return two_pi * specfun::envelope_c * g.sqrt_gcd * g.tauM *
           std::pow(g.A, g.k - 1.0) * std::pow(static_cast<double>(g.M), -s) *
           tau_zeta_tail(s, static_cast<double>(C));
}

// Certified bound on sum over c in (C1, C2] in the oscillatory range
// (per-term bound 2 pi tau(c) tau(M) sqrt(g) envelope_c A^{-1/2}).
double osc_tail(const GeomContext& g, int64_t C1, int64_t C2) {
    if (C2 <= C1) return 0.0;
    double count = sum_tau_upper(static_cast<double>(C2));
    return two_pi * specfun::envelope_c * g.tauM * g.sqrt_gcd * count /
           std::sqrt(std::max(g.A, 1e-300));
}

// Full remainder bound when the computed sum stops at C (any C >= 0).
double remainder_bound(const GeomContext& g, int64_t C) {
    if (C >= g.C0) return power_tail(g, C);
    return osc_tail(g, C, g.C0) + power_tail(g, g.C0);
}

// Least C >= C0 with power_tail < eps_c, or c_cap+1 when unattainable.
int64_t find_cutoff(const GeomContext& g, double eps_c, int64_t c_cap) {
    int64_t lo = g.C0;
    if (power_tail(g, lo) < eps_c) return lo;
    int64_t hi = lo;
    while (hi <= c_cap && power_tail(g, hi) >= eps_c) hi *= 2;
    if (hi > c_cap && power_tail(g, c_cap) >= eps_c) return c_cap + 1;
    hi = std::min(hi, c_cap);
    lo = hi / 2;
    while (lo + 1 < hi) {
        int64_t mid = lo + (hi - lo) / 2;
        if (power_tail(g, mid) < eps_c)
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

double geometric_sign(int k) { return (k / 2) % 2 == 0 ? 1.0 : -1.0; }  // i^{-k}, k even

// ---- smooth-number tails ---------------------------------------------------

struct SmoothTail {
    std::vector<int64_t> es;       // L2-smooth numbers <= horizon, increasing
    std::vector<double> suffix;    // suffix[i] = sum_{j >= i} tau(es[j]^2)/es[j] + rankin
    double rankin = 0.0;           // bound for the part beyond the horizon
};

double tau_of_square(int64_t e) {
    double t = 1.0;
    for (auto& [p, a] : arith::factor(e).factors) t *= 2 * a + 1;
    return t;
}

SmoothTail make_smooth_tail(int64_t l2, int64_t horizon) {
    SmoothTail st;
    st.es = smooth_numbers(l2, horizon);
    auto ps = arith::factor(l2).factors;
    if (l2 == 1) {
        st.rankin = 0.0;
    } else {
        double best = 1e308;
        for (double theta = 0.05; theta < 0.96; theta += 0.05) {
            double prod = 1.0;
            for (auto& [p, a] : ps) {
                double x = std::pow(static_cast<double>(p), -theta);
                prod *= (1.0 + x) / ((1.0 - x) * (1.0 - x));
            }
            best = std::min(best, std::pow(static_cast<double>(horizon), theta - 1.0) * prod);
        }
        st.rankin = best;
    }
    st.suffix.assign(st.es.size() + 1, st.rankin);
    for (size_t i = st.es.size(); i-- > 0;)
        st.suffix[i] = st.suffix[i + 1] + tau_of_square(st.es[i]) / static_cast<double>(st.es[i]);
    return st;
}

const SmoothTail& smooth_tail_for(int64_t l2) {
    static std::map<int64_t, SmoothTail> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(l2);
    if (it == cache.end())
        it = cache.emplace(l2, make_smooth_tail(l2, int64_t{1} << 20)).first;
    return it->second;
}

// tail of sum tau(e^2)/e over smooth e > E (E a member of the list or 0)
double smooth_tail_beyond(const SmoothTail& st, int64_t E) {
    size_t i = std::upper_bound(st.es.begin(), st.es.end(), E) - st.es.begin();
    return st.suffix[i];
}

}  // namespace

std::vector<int64_t> smooth_numbers(int64_t l2, int64_t limit) {
    std::vector<int64_t> out{1};
    for (auto& [p, e] : arith::factor(l2).factors) {
        size_t sz = out.size();
        for (size_t i = 0; i < sz; ++i) {
            __int128 v = out[i];
            while ((v *= p) <= limit) out.push_back(static_cast<int64_t>(v));
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

double geometric_bound(int k, int64_t d, int64_t m, int64_t n) {
    GeomContext g = make_geom(k, d, m, n);
    kahan_sum b;
    for (int64_t c = 1; c <= g.C0; ++c) {
        double cd = static_cast<double>(c) * static_cast<double>(d);
        b.add(two_pi * static_cast<double>(arith::tau(c)) * g.tauM * g.sqrt_gcd / std::sqrt(cd) *
              specfun::j_envelope(k, g.A / cd));
    }
    b.add(power_tail(g, g.C0));
    return b.value();
}

double c_tail_bound(int k, int64_t d, int64_t m, int64_t n, int64_t cut) {
    return remainder_bound(make_geom(k, d, m, n), cut);
}

double delta_mass_bound(int k, int64_t d) {
    static std::map<std::pair<int, int64_t>, double> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_pair(k, d);
    auto it = cache.find(key);
    if (it == cache.end())
        it = cache.emplace(key, 1.0 + geometric_bound(k, d, 1, 1)).first;
    return it->second;
}

double lemma22_envelope(int64_t q, int64_t m, int64_t n, double eps_exponent) {
    double mn = static_cast<double>(m) * static_cast<double>(n);
    double g3 = static_cast<double>(std::gcd(std::gcd(m, n), q));
    double gm = static_cast<double>(std::gcd(m, q));
    double gn = static_cast<double>(std::gcd(n, q));
    return static_cast<double>(arith::tau(q)) * g3 * std::pow(mn, eps_exponent) /
           (static_cast<double>(q) * std::sqrt(gm + gn)) *
           std::sqrt(mn / (std::sqrt(mn) + static_cast<double>(q)));
}

DeltaResult delta_q(const FamilyParams& params, int64_t m, int64_t n, double eps) {
    validate(params);
    if (m < 1 || n < 1) throw std::domain_error("delta_q: m, n must be >= 1");
    if (!(eps > 0.0)) throw std::domain_error("delta_q: eps must be > 0");
    GeomContext g = make_geom(params.k, params.q, m, n);
    int64_t cap = 4'000'000;
    int64_t C = find_cutoff(g, eps, cap);
    if (C > cap)
        throw truncation_infeasible("delta_q: eps unattainable within the c cap",
                                    power_tail(g, cap));
    double sign = geometric_sign(params.k);
    kahan_sum acc;
    double jerr = 0.0;
    for (int64_t c = 1; c <= C; ++c) {
        int64_t cq = c * params.q;
        double S = arith::kloosterman(m, n, cq);
        auto J = specfun::bessel_j(params.k - 1, g.A / static_cast<double>(cq));
        acc.add(S / static_cast<double>(cq) * J.value);
        jerr += std::abs(S) / static_cast<double>(cq) * J.est_abs_error;
    }
    DeltaResult r;
    r.value = (m == n ? 1.0 : 0.0) + two_pi * sign * acc.value();
    r.tail_bound = power_tail(g, C) + two_pi * jerr + 1e-15 * static_cast<double>(C);
    r.c_terms = C;
    r.e_terms = 0;
    return r;
}

namespace {

void check_star_inputs(const FamilyParams& params, std::span<const int64_t> ms, int64_t n,
                       const TruncationPolicy& pol) {
    validate(params);
    if (!(pol.eps > 0.0)) throw std::domain_error("delta_q_star: eps must be > 0");
    if (n < 1) throw std::domain_error("delta_q_star: n must be >= 1");
    for (int64_t m : ms) {
        if (m < 1) throw std::domain_error("delta_q_star: m must be >= 1");
        if (std::gcd(m * n, params.q) != 1)
            throw std::domain_error("delta_q_star: requires gcd(mn, q) = 1");
    }
}

StarPlan build_plan(const FamilyParams& params, std::span<const int64_t> ms, int64_t n,
                    const TruncationPolicy& pol) {
    check_star_inputs(params, ms, n, pol);
    const int k = params.k;
    auto decomps = ng_terms(params.q);
    int64_t m_max = 1;
    double tau_mn_max = 1.0;
    for (int64_t m : ms) {
        m_max = std::max(m_max, m);
        tau_mn_max = std::max(tau_mn_max, static_cast<double>(arith::tau(m)) *
                                              static_cast<double>(arith::tau(n)));
    }

    const double nmf = static_cast<double>(std::max<size_t>(1, ms.size()));
    auto c_cost_cap = [&](int64_t d) {
        double ch =
            std::sqrt(2.0 * pol.job_ops / (static_cast<double>(d) * (12.0 + 0.6 * nmf)));
        return std::max<int64_t>(32, static_cast<int64_t>(ch));
    };

    double eps_decomp =
        pol.eps / (2.0 * static_cast<double>(std::max<size_t>(1, decomps.size())));
    StarPlan plan;
    double etail_best_unit = 0.0;
    for (auto& t : decomps) {
        if (t.mu == 0) continue;
        const SmoothTail& st = smooth_tail_for(t.L2);
        double w_abs = t.euler / (static_cast<double>(t.L1) * static_cast<double>(t.L2));
        double mass = delta_mass_bound(k, t.d);
        double ch = static_cast<double>(c_cost_cap(t.d));
        int64_t e_star = 0;
        for (int64_t e : st.es) {
            if (e > pol.e_hard_cap) break;
            double tail_here = w_abs * mass * smooth_tail_beyond(st, e);
            bool eps_met = tail_here * tau_mn_max < eps_decomp;
            if (!pol.strict) {
                double c0_est = 2.0 * two_pi *
                                std::sqrt(static_cast<double>(m_max) * static_cast<double>(n)) *
                                static_cast<double>(e) / static_cast<double>(t.d);
                if (c0_est > ch && e > 1) break;  // cost cap; e = 1 always runs
            }
            plan.jobs.push_back(
                {t, e, static_cast<double>(t.mu) * w_abs / static_cast<double>(e), {}});
            e_star = e;
            if (eps_met) break;
        }
        plan.etail_unit += w_abs * mass * smooth_tail_beyond(st, e_star);
        etail_best_unit += w_abs * mass * st.rankin;
    }
    if (pol.strict && plan.etail_unit * tau_mn_max >= pol.eps / 2.0 * (1.0 + 1e-12))
        throw truncation_infeasible("delta_q_star: e-sum tail unattainable at the e cap",
                                    etail_best_unit * tau_mn_max);

    // per-(job, m) c-sum cutoffs
    double eps_c =
        pol.eps / (2.0 * static_cast<double>(std::max<size_t>(1, plan.jobs.size())));
    for (auto& job : plan.jobs) {
        int64_t d = job.t.d;
        int64_t cost_cap = pol.strict ? pol.c_cap : std::min<int64_t>(pol.c_cap, c_cost_cap(d));
        int64_t ne2 = n * job.e * job.e;
        job.cut.resize(ms.size());
        for (size_t i = 0; i < ms.size(); ++i) {
            GeomContext g = make_geom(k, d, ms[i], ne2);
            int64_t want =
                find_cutoff(g, eps_c / std::max(std::abs(job.weight), 1e-300), pol.c_cap);
            if (want > pol.c_cap) {
                if (pol.strict)
                    throw truncation_infeasible(
                        "delta_q_star: c-sum tail unattainable",
                        std::abs(job.weight) * remainder_bound(g, pol.c_cap));
                want = pol.c_cap;
            }
            job.cut[i] = std::min(want, cost_cap);
        }
    }
    return plan;
}

// Shared implementation: Delta*_q(m_i, n) for a batch of m's coprime to q.
std::vector<DeltaResult> star_core(const FamilyParams& params, std::span<const int64_t> ms,
                                   int64_t n, const TruncationPolicy& pol) {
    StarPlan plan = build_plan(params, ms, n, pol);
    const int k = params.k;
    double sign = geometric_sign(k);
    size_t nm = ms.size();
    std::vector<kahan_sum> acc(nm);
    std::vector<double> tail(nm, 0.0);
    for (size_t i = 0; i < nm; ++i)
        tail[i] = plan.etail_unit * static_cast<double>(arith::tau(ms[i])) *
                  static_cast<double>(arith::tau(n));
    int64_t c_terms_total = 0;

    std::vector<int64_t> mvals;
    std::vector<size_t> idx;
    std::vector<double> kl;

    // remainder bounds and the e = 1 diagonal
    for (size_t j = 0; j < plan.jobs.size(); ++j) {
        const StarPlanJob& job = plan.jobs[j];
        int64_t ne2 = n * job.e * job.e;
        for (size_t i = 0; i < nm; ++i) {
            GeomContext g = make_geom(k, job.t.d, ms[i], ne2);
            tail[i] += std::abs(job.weight) * remainder_bound(g, job.cut[i]);
            if (ms[i] == ne2) acc[i].add(job.weight);
        }
    }

    // walk jobs grouped by decomposition so one table serves every e
    size_t j0 = 0;
    while (j0 < plan.jobs.size()) {
        size_t j1 = j0;
        int64_t d = plan.jobs[j0].t.d;
        while (j1 < plan.jobs.size() && plan.jobs[j1].t.d == d &&
               plan.jobs[j1].t.L1 == plan.jobs[j0].t.L1 &&
               plan.jobs[j1].t.L2 == plan.jobs[j0].t.L2)
            ++j1;
        int64_t max_cut = 0;
        for (size_t j = j0; j < j1; ++j)
            for (size_t i = 0; i < nm; ++i) max_cut = std::max(max_cut, plan.jobs[j].cut[i]);

        for (int64_t c = 1; c <= max_cut; ++c) {
            int64_t cd = c * d;
            bool any = false;
            for (size_t j = j0; j < j1 && !any; ++j)
                for (size_t i = 0; i < nm; ++i)
                    if (c <= plan.jobs[j].cut[i]) {
                        any = true;
                        break;
                    }
            if (!any) break;
            arith::KloostermanTable table(cd);
            ++c_terms_total;
            for (size_t j = j0; j < j1; ++j) {
                const StarPlanJob& job = plan.jobs[j];
                int64_t ne2 = n * job.e * job.e;
                mvals.clear();
                idx.clear();
                for (size_t i = 0; i < nm; ++i)
                    if (c <= job.cut[i]) {
                        idx.push_back(i);
                        mvals.push_back(ms[i]);
                    }
                if (mvals.empty()) continue;
                kl.resize(mvals.size());
                table.batch(mvals, ne2, kl.data());
                for (size_t a = 0; a < idx.size(); ++a) {
                    size_t i = idx[a];
                    double arg = 2.0 * two_pi *
                                 std::sqrt(static_cast<double>(ms[i]) * static_cast<double>(ne2)) /
                                 static_cast<double>(cd);
                    auto J = specfun::bessel_j(k - 1, arg);
                    acc[i].add(job.weight * two_pi * sign * kl[a] / static_cast<double>(cd) *
                               J.value);
                    tail[i] += std::abs(job.weight) * two_pi * std::abs(kl[a]) /
                               static_cast<double>(cd) * J.est_abs_error;
                }
            }
        }
        j0 = j1;
    }

    std::vector<DeltaResult> out(nm);
    for (size_t i = 0; i < nm; ++i) {
        out[i].value = acc[i].value();
        out[i].tail_bound = tail[i] + 1e-15 * static_cast<double>(c_terms_total);
        out[i].c_terms = std::max<int64_t>(1, c_terms_total);
        out[i].e_terms = static_cast<int64_t>(plan.jobs.size());
    }
    return out;
}

}  // namespace

StarPlan star_plan(const FamilyParams& params, std::span<const int64_t> ms, int64_t n,
                   const TruncationPolicy& policy) {
    return build_plan(params, ms, n, policy);
}

DeltaResult delta_q_star(const FamilyParams& params, int64_t m, int64_t n, double eps) {
    TruncationPolicy pol;
    pol.eps = eps;
    pol.strict = true;
    std::array<int64_t, 1> ms{m};
    return star_core(params, std::span<const int64_t>(ms.data(), 1), n, pol)[0];
}

DeltaResult delta_q_star_auto(const FamilyParams& params, int64_t m, int64_t n,
                              const TruncationPolicy& policy) {
    TruncationPolicy pol = policy;
    pol.strict = false;
    std::array<int64_t, 1> ms{m};
    return star_core(params, std::span<const int64_t>(ms.data(), 1), n, pol)[0];
}

std::vector<DeltaResult> delta_q_star_batch(const FamilyParams& params,
                                            std::span<const int64_t> ms,
                                            const TruncationPolicy& policy) {
    TruncationPolicy pol = policy;
    pol.strict = false;
    return star_core(params, ms, 1, pol);
}

}  // namespace lowzero::petersson
