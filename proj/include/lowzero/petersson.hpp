#pragma once

// Geometric-side Petersson averages Delta_q(m,n) and Ng's newform-restricted
// average Delta*_q(m,n), with certified truncation of the c-sum and the e-sum.
//
// Certification scheme:
//   * c-tails: Weil bound x Bessel envelope, summed in closed form past the
//     cutoff (power branch of the envelope, tau(c) handled by partial
//     summation against sum_{c<=x} tau(c) <= x(log x + 1)).
//   * e-tails: the Deligne bound |Delta_d(m,N)| <= tau(m) tau(N) Delta_d(1,1),
//     with Delta_d(1,1) bounded by the same geometric machinery; the smooth
//     tail over e | L2^inf is enumerated exactly to a horizon and closed by a
//     Rankin-trick remainder.

#include <cstdint>
#include <span>
#include <vector>

#include "lowzero/common.hpp"

namespace lowzero::petersson {

using std::int64_t;

struct FamilyParams {
    int k = 12;      // weight, even, 4 <= k <= 20
    int64_t q = 1;   // level
};

void validate(const FamilyParams& p);

struct DeltaResult {
    double value = 0.0;
    double tail_bound = 0.0;
    int64_t c_terms = 0;
    int64_t e_terms = 0;  // 0 for plain Delta
};

// q = q1 q2 with q1 the largest factor whose primes all appear squared in q.
std::pair<int64_t, int64_t> decompose_q(int64_t q);

// One term of the Ng decomposition q = L1 L2 d.
struct NgTerm {
    int64_t L1 = 1, L2 = 1, d = 1;
    int mu = 1;            // mu(L1 L2)
    double euler = 1.0;    // prod_{p|L1, p^2 !| d} (1 - p^-2)^-1
};

std::vector<NgTerm> ng_terms(int64_t q);

// Caps and budgets shared by every truncated sum so that independent
// pipelines make identical truncation decisions.
struct TruncationPolicy {
    double eps = 1e-8;         // certified tail target
    bool strict = true;        // throw truncation_infeasible when eps is out of reach
    int64_t c_cap = 4'000'000; // hard cap on c per inner sum
    int64_t e_hard_cap = 1 << 20;
    double job_ops = 1.0e7;    // soft per-(d,e) cost budget in auto mode
};

// Delta_q(m,n) = delta(m,n) + 2 pi i^{-k} sum_c S(m,n;cq)/(cq) J_{k-1}(4 pi sqrt(mn)/(cq)).
DeltaResult delta_q(const FamilyParams& params, int64_t m, int64_t n, double eps);

// Ng's formula; requires gcd(mn, q) = 1.  Strict contract: certified
// tail_bound <= eps or truncation_infeasible.
DeltaResult delta_q_star(const FamilyParams& params, int64_t m, int64_t n, double eps);

// Best-effort variant: never throws on truncation; honors the policy's caps
// and reports whatever tail bound was achieved.
DeltaResult delta_q_star_auto(const FamilyParams& params, int64_t m, int64_t n,
                              const TruncationPolicy& policy);

// Delta*_q(m, 1) for many m at once (all coprime to q), sharing the Ng
// enumeration and batching Kloosterman sums across m.  The density pipeline
// and the expanded-sigma1 pipeline both run on exactly this plan.
std::vector<DeltaResult> delta_q_star_batch(const FamilyParams& params,
                                            std::span<const int64_t> ms,
                                            const TruncationPolicy& policy);

// The truncation decisions star_core makes, exported so an independent
// traversal of the Ng expansion can reproduce the identical finite sum.
struct StarPlanJob {
    NgTerm t;
    int64_t e = 1;
    double weight = 1.0;         // mu/(L1 L2) * euler / e
    std::vector<int64_t> cut;    // per-m c-sum cutoff
};

struct StarPlan {
    std::vector<StarPlanJob> jobs;  // grouped by decomposition, e ascending
    double etail_unit = 0.0;        // per-m certified e-tail: multiply by tau(m) tau(n)
};

StarPlan star_plan(const FamilyParams& params, std::span<const int64_t> ms, int64_t n,
                   const TruncationPolicy& policy);

// Certified upper bound for |Delta_d(m,n) - delta(m,n)| from c = 1 on.
double geometric_bound(int k, int64_t d, int64_t m, int64_t n);

// Certified bound for the part of the c-sum of Delta_d(m,n) beyond c = cut.
double c_tail_bound(int k, int64_t d, int64_t m, int64_t n, int64_t cut);

// 1 + geometric_bound(k, d, 1, 1) >= Delta_d(1,1); cached.
double delta_mass_bound(int k, int64_t d);

// The Lemma-2.2-shaped envelope (without its implied constant):
// tau(q) (m,n,q) (mn)^eps / (q ((m,q)+(n,q))^{1/2}) * (mn/(sqrt(mn)+q))^{1/2}.
double lemma22_envelope(int64_t q, int64_t m, int64_t n, double eps_exponent = 0.05);

// Increasing L2-smooth numbers <= limit.
std::vector<int64_t> smooth_numbers(int64_t l2, int64_t limit);

}  // namespace lowzero::petersson
