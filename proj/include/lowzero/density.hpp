#pragma once

// The statistic layer: explicit-formula prime sums, the one-level-density
// average over levels, Sigma_1 through both the direct Delta* route and the
// Ng quintuple expansion, and prime-sum monitors.

#include <cstdint>
#include <optional>
#include <vector>

#include "lowzero/arith.hpp"
#include "lowzero/petersson.hpp"
#include "lowzero/testfn.hpp"

namespace lowzero::density {

using std::int64_t;

// Family average of c_f(p^nu) as a signed combination of Delta*_q(m, 1).
struct DeltaQuery {
    int64_t m = 1;
    double coeff = 1.0;
};
std::vector<DeltaQuery> cf_reduce(int nu, int64_t p, int64_t q);

struct ExplicitSum {
    double value = 0.0;        // (1/log q) sum_n Lambda(n) <c_f(n)> n^{-1/2} phihat(log n/log q)
    double hecke = 0.0;        // the Delta*-weighted blocks (nu = 1, 2, >= 3), /log q
    double chi0 = 0.0;         // (1/log q) sum_{p !| q} (log p / p) phihat(2 log p / log q)
    double mass = 0.0;         // Delta*_q(1,1)
    double mass_tail = 0.0;
    double tail = 0.0;         // certified ledger for value (truncations, p | q blocks)
    int64_t prime_cutoff = 2;
};

// Per-level explicit-formula prime sum.  p | q prime powers: the nu = 2 block
// is exact (c_f(p^2) = 1/p there); nu = 1 and nu >= 3 go into the ledger.
ExplicitSum explicit_formula_sum(int64_t q, int k, const testfn::TestFunctionPair& phi,
                                 const petersson::TruncationPolicy& policy);

struct DensityConfig {
    int64_t Q = 64;
    int k = 12;
    testfn::TestFunctionPair phi;
    testfn::WeightFunction psi;
    petersson::TruncationPolicy policy;
    int threads = 1;              // 1 = deterministic sequential
    double prime_budget = 2e6;    // guard on the prime cutoff (b Q)^sigma
};

struct DensityReport {
    std::vector<std::pair<int64_t, double>> q_grid;  // (q, psi(q/Q))
    double statistic = 0.0;      // assembled density, chi0 block completed by its PNT value
    double statistic_raw = 0.0;  // chi0 block kept as the computed prime sum
    double prediction = 0.0;     // phihat(0) + phi(0)/2
    double pnt_residual = 0.0;   // statistic - statistic_raw
    double n_of_q = 0.0;
    int64_t prime_cutoff = 2;
    double tail_bound = 0.0;
    double seconds = 0.0;
};

double n_of_q(int64_t Q, int k, const testfn::WeightFunction& psi,
              const petersson::TruncationPolicy& policy);

DensityReport one_level_density(const DensityConfig& cfg);

// Sigma_1 = N(Q)^{-1} sum_q Psi(q/Q) (log q)^{-1}
//           sum_{p !| q} (log p) p^{-1/2} phihat(log p/log q) Delta*_q(p, 1).
struct Sigma1Result {
    double value = 0.0;
    double tail_bound = 0.0;
    double n_of_q = 0.0;
    double seconds = 0.0;
    double discard_ledger = 0.0;  // expanded mode: bound for cap-discarded terms
    double fill_in = 0.0;         // expanded paper mode: added p | q mass
};

Sigma1Result sigma1_direct(const DensityConfig& cfg);

// The section-5 quintuple expansion of Sigma_1 run on the same truncation
// plan.  Caps <= 0 mean "no cap" (identity mode, p !| q kept, must agree with
// sigma1_direct).  Positive caps restrict L1 L2 < l0_cap and e < e_cap and,
// when fill_in_pq is set, add the p | q terms the paper fills in.
Sigma1Result sigma1_expanded(const DensityConfig& cfg, int64_t l0_cap, int64_t e_cap,
                             bool fill_in_pq);

struct PrimeSumResult {
    cplx sum{0.0, 0.0};        // sum_{p !| N} chi(p) log p V(p/P) e(v p/P) p^{-z}
    cplx main_term{0.0, 0.0};  // trivial mode: P^{1/2-it} V1~(1/2-it)
    cplx residual{0.0, 0.0};
};

// z = 1/2 + it.  chi absent means trivial weights (and the Mellin main term
// is computed); window is V scaled to [P/2, 3P].
PrimeSumResult smoothed_prime_sum(const std::optional<arith::DirichletCharacter>& chi, double t,
                                  const testfn::DyadicWindow& v, double P, double vphase,
                                  int64_t N);

double rmt_prediction(const testfn::TestFunctionPair& phi);

}  // namespace lowzero::density
