#include "lowzero/density.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "lowzero/quadrature.hpp"
#include "lowzero/specfun.hpp"

namespace lowzero::density {

std::vector<DeltaQuery> cf_reduce(int nu, int64_t p, int64_t q) {
    if (nu < 1) throw std::domain_error("cf_reduce: nu must be >= 1");
    if (!arith::is_prime(p)) throw std::domain_error("cf_reduce: p must be prime");
    if (q % p == 0)
        throw std::domain_error("cf_reduce: p | q is handled by the fill-in ledger, not Delta*");
    if (nu == 1) return {{p, 1.0}};
    int64_t pnu = 1;
    for (int i = 0; i < nu; ++i) pnu *= p;
    if (nu == 2) return {{pnu, 1.0}, {1, -1.0}};
    return {{pnu, 1.0}, {pnu / (p * p), -1.0}};
}

double rmt_prediction(const testfn::TestFunctionPair& phi) {
    return phi.phi_hat(0.0) + 0.5 * phi.phi(0.0);
}

namespace {

// prime powers n = p^nu < plim with p coprime to q, plus their reduction
// partners; dedup/sorted
struct PrimeGrid {
    std::vector<int64_t> primes;           // all p < plim (regardless of q)
    std::vector<int64_t> ms;               // {1} + coprime prime powers < plim
};

PrimeGrid make_prime_grid(int64_t q, double plim, const std::vector<int64_t>& primes) {
    PrimeGrid g;
    g.primes = primes;
    g.ms.push_back(1);
    for (int64_t p : primes) {
        if (static_cast<double>(p) >= plim) break;
        if (q % p == 0) continue;
        double v = static_cast<double>(p);
        int64_t pj = p;
        while (v < plim) {
            g.ms.push_back(pj);
            v *= static_cast<double>(p);
            if (v < plim) pj *= p;
        }
    }
    std::sort(g.ms.begin(), g.ms.end());
    g.ms.erase(std::unique(g.ms.begin(), g.ms.end()), g.ms.end());
    return g;
}

struct QLevel {
    ExplicitSum ef;
    double s1 = 0.0;        // nu = 1 hecke block (over log q)
    double s1_tail = 0.0;
};

QLevel level_sums(int64_t q, int k, const testfn::TestFunctionPair& phi,
                  const petersson::TruncationPolicy& policy,
                  const std::vector<int64_t>& primes) {
    if (q < 2) throw std::domain_error("explicit_formula_sum: level statistics start at q >= 2");
    double logq = std::log(static_cast<double>(q));
    double plim = std::pow(static_cast<double>(q), phi.sigma);
    PrimeGrid grid = make_prime_grid(q, plim, primes);

    petersson::FamilyParams fp{k, q};
    auto res = petersson::delta_q_star_batch(fp, grid.ms, policy);
    auto lookup = [&](int64_t m) -> const petersson::DeltaResult& {
        size_t i = std::lower_bound(grid.ms.begin(), grid.ms.end(), m) - grid.ms.begin();
        return res[i];
    };

    QLevel L;
    L.ef.mass = lookup(1).value;
    L.ef.mass_tail = lookup(1).tail_bound;
    L.ef.prime_cutoff = static_cast<int64_t>(plim);

    kahan_sum hecke, chi0, tail, s1, s1t;
    for (int64_t p : grid.primes) {
        if (static_cast<double>(p) >= plim) break;
        double lp = std::log(static_cast<double>(p));
        bool divides = (q % p == 0);
        // nu = 1
        double w1 = lp / std::sqrt(static_cast<double>(p)) * phi.phi_hat(lp / logq);
        if (divides) {
            // |<lambda(p)>| <= mass / sqrt(p)
            tail.add(std::abs(w1) / std::sqrt(static_cast<double>(p)) *
                     (L.ef.mass + L.ef.mass_tail));
        } else {
            const auto& d = lookup(p);
            hecke.add(w1 * d.value);
            s1.add(w1 * d.value);
            tail.add(std::abs(w1) * d.tail_bound);
            s1t.add(std::abs(w1) * d.tail_bound);
        }
        // nu = 2
        if (static_cast<double>(p) * static_cast<double>(p) < plim) {
            double w2 = lp / static_cast<double>(p) * phi.phi_hat(2.0 * lp / logq);
            if (divides) {
                // c_f(p^2) = lambda_f(p)^2 = 1/p exactly
                hecke.add(w2 / static_cast<double>(p) * L.ef.mass);
                tail.add(std::abs(w2) / static_cast<double>(p) * L.ef.mass_tail);
            } else {
                const auto& d = lookup(p * p);
                hecke.add(w2 * d.value);
                tail.add(std::abs(w2) * d.tail_bound);
                chi0.add(lp / static_cast<double>(p) * phi.phi_hat(2.0 * lp / logq));
            }
        }
        // nu >= 3
        int64_t pnu = p * p * p;
        int nu = 3;
        while (static_cast<double>(pnu) < plim) {
            double w = lp * std::pow(static_cast<double>(p), -0.5 * nu) *
                       phi.phi_hat(nu * lp / logq);
            if (divides) {
                tail.add(std::abs(w) * std::pow(static_cast<double>(p), -0.5 * nu) *
                         (L.ef.mass + L.ef.mass_tail));
            } else {
                const auto& hi = lookup(pnu);
                const auto& lo = lookup(pnu / (p * p));
                hecke.add(w * (hi.value - lo.value));
                tail.add(std::abs(w) * (hi.tail_bound + lo.tail_bound));
            }
            pnu *= p;
            ++nu;
        }
    }
    L.ef.hecke = hecke.value() / logq;
    L.ef.chi0 = chi0.value() / logq;
    L.ef.tail = tail.value() / logq;
    L.ef.value = L.ef.hecke - L.ef.chi0 * L.ef.mass;
    L.s1 = s1.value() / logq;
    L.s1_tail = s1t.value() / logq;
    return L;
}

std::vector<std::pair<int64_t, double>> level_grid(int64_t Q,
                                                   const testfn::WeightFunction& psi) {
    std::vector<std::pair<int64_t, double>> grid;
    int64_t lo = static_cast<int64_t>(std::ceil(psi.a * static_cast<double>(Q)));
    int64_t hi = static_cast<int64_t>(std::floor(psi.b * static_cast<double>(Q)));
    for (int64_t q = std::max<int64_t>(2, lo); q <= hi; ++q) {
        double w = psi.psi(static_cast<double>(q) / static_cast<double>(Q));
        if (w > 0.0) grid.emplace_back(q, w);
    }
    return grid;
}

// Evaluate worker(q) for every q in grid, in parallel, then hand the results
// to the reducer in grid order (deterministic regardless of thread count).
template <typename PerQ>
std::vector<PerQ> run_levels(const std::vector<std::pair<int64_t, double>>& grid, int threads,
                             const std::function<PerQ(int64_t)>& worker) {
    std::vector<PerQ> results(grid.size());
    if (threads <= 1) {
        for (size_t i = 0; i < grid.size(); ++i) results[i] = worker(grid[i].first);
        return results;
    }
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::mutex error_mu;
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            while (true) {
                size_t i = next.fetch_add(1);
                if (i >= grid.size()) break;
                try {
                    results[i] = worker(grid[i].first);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mu);
                    if (!error) error = std::current_exception();
                    break;
                }
            }
        });
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
    return results;
}

void check_prime_budget(const DensityConfig& cfg) {
    double plim = std::pow(cfg.psi.b * static_cast<double>(cfg.Q), cfg.phi.sigma);
    if (plim > cfg.prime_budget)
        throw truncation_infeasible(
            "prime budget exceeded: needs primes up to " + std::to_string(plim), plim);
}

}  // namespace

ExplicitSum explicit_formula_sum(int64_t q, int k, const testfn::TestFunctionPair& phi,
                                 const petersson::TruncationPolicy& policy) {
    double plim = std::pow(static_cast<double>(q), phi.sigma);
    auto primes = arith::primes_up_to(static_cast<int64_t>(plim) + 1);
    return level_sums(q, k, phi, policy, primes).ef;
}

double n_of_q(int64_t Q, int k, const testfn::WeightFunction& psi,
              const petersson::TruncationPolicy& policy) {
    if (Q < 4) throw std::domain_error("n_of_q: Q must be >= 4");
    auto grid = level_grid(Q, psi);
    kahan_sum total;
    for (auto& [q, w] : grid) {
        auto r = petersson::delta_q_star_auto({k, q}, 1, 1, policy);
        total.add(w * r.value);
    }
    return total.value();
}

DensityReport one_level_density(const DensityConfig& cfg) {
    auto t0 = std::chrono::steady_clock::now();
    check_prime_budget(cfg);
    if (cfg.Q < 4) throw std::domain_error("one_level_density: Q must be >= 4");
    auto grid = level_grid(cfg.Q, cfg.psi);
    auto primes = arith::primes_up_to(
        static_cast<int64_t>(std::pow(cfg.psi.b * static_cast<double>(cfg.Q), cfg.phi.sigma)) + 1);

    std::function<QLevel(int64_t)> worker = [&](int64_t q) {
        return level_sums(q, cfg.k, cfg.phi, cfg.policy, primes);
    };
    auto levels = run_levels<QLevel>(grid, cfg.threads, worker);

    double phihat0 = cfg.phi.phi_hat(0.0);
    double phi0 = cfg.phi.phi(0.0);
    kahan_sum num_raw, num_l41, mass_sum, tail_num, mass_tail_sum;
    int64_t cutoff = 2;
    for (size_t i = 0; i < grid.size(); ++i) {
        double w = grid[i].second;
        const QLevel& L = levels[i];
        double z_raw = phihat0 * L.ef.mass - 2.0 * L.ef.value;
        double z_l41 = z_raw + (0.5 * phi0 - 2.0 * L.ef.chi0) * L.ef.mass;
        num_raw.add(w * z_raw);
        num_l41.add(w * z_l41);
        mass_sum.add(w * L.ef.mass);
        mass_tail_sum.add(w * L.ef.mass_tail);
        tail_num.add(w * (2.0 * L.ef.tail + (std::abs(phihat0) + std::abs(phi0)) * L.ef.mass_tail));
        cutoff = std::max(cutoff, L.ef.prime_cutoff);
    }
    double N = mass_sum.value();
    if (!(N > 0.0)) throw std::runtime_error("one_level_density: vanishing family mass");

    DensityReport rep;
    rep.q_grid = grid;
    rep.statistic = num_l41.value() / N;
    rep.statistic_raw = num_raw.value() / N;
    rep.prediction = rmt_prediction(cfg.phi);
    rep.pnt_residual = rep.statistic - rep.statistic_raw;
    rep.n_of_q = N;
    rep.prime_cutoff = cutoff;
    rep.tail_bound = (tail_num.value() + std::abs(rep.statistic) * mass_tail_sum.value()) / N;
    rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

Sigma1Result sigma1_direct(const DensityConfig& cfg) {
    auto t0 = std::chrono::steady_clock::now();
    check_prime_budget(cfg);
    auto grid = level_grid(cfg.Q, cfg.psi);
    auto primes = arith::primes_up_to(
        static_cast<int64_t>(std::pow(cfg.psi.b * static_cast<double>(cfg.Q), cfg.phi.sigma)) + 1);

    struct PerQ {
        double s1 = 0.0, s1_tail = 0.0, mass = 0.0, mass_tail = 0.0;
    };
    std::function<PerQ(int64_t)> worker = [&](int64_t q) {
        double logq = std::log(static_cast<double>(q));
        double plim = std::pow(static_cast<double>(q), cfg.phi.sigma);
        std::vector<int64_t> ms{1};
        for (int64_t p : primes) {
            if (static_cast<double>(p) >= plim) break;
            if (q % p != 0) ms.push_back(p);
        }
        auto res = petersson::delta_q_star_batch({cfg.k, q}, ms, cfg.policy);
        PerQ out;
        out.mass = res[0].value;
        out.mass_tail = res[0].tail_bound;
        kahan_sum s, st;
        for (size_t i = 1; i < ms.size(); ++i) {
            double lp = std::log(static_cast<double>(ms[i]));
            double w = lp / std::sqrt(static_cast<double>(ms[i])) * cfg.phi.phi_hat(lp / logq);
            s.add(w * res[i].value);
            st.add(std::abs(w) * res[i].tail_bound);
        }
        out.s1 = s.value() / logq;
        out.s1_tail = st.value() / logq;
        return out;
    };
    auto levels = run_levels<PerQ>(grid, cfg.threads, worker);

    kahan_sum num, tails, mass;
    for (size_t i = 0; i < grid.size(); ++i) {
        num.add(grid[i].second * levels[i].s1);
        tails.add(grid[i].second * levels[i].s1_tail);
        mass.add(grid[i].second * levels[i].mass);
    }
    Sigma1Result r;
    r.n_of_q = mass.value();
    r.value = num.value() / r.n_of_q;
    r.tail_bound = tails.value() / r.n_of_q;
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

Sigma1Result sigma1_expanded(const DensityConfig& cfg, int64_t l0_cap, int64_t e_cap,
                             bool fill_in_pq) {
    auto t0 = std::chrono::steady_clock::now();
    check_prime_budget(cfg);
    if (l0_cap == 0 || e_cap == 0) throw std::domain_error("sigma1_expanded: cap = 0");
    auto grid = level_grid(cfg.Q, cfg.psi);
    auto primes = arith::primes_up_to(
        static_cast<int64_t>(std::pow(cfg.psi.b * static_cast<double>(cfg.Q), cfg.phi.sigma)) + 1);
    double sign = (cfg.k / 2) % 2 == 0 ? 1.0 : -1.0;

    struct PerQ {
        double s1 = 0.0, tail = 0.0, mass = 0.0, discard = 0.0, fill = 0.0;
    };
    std::function<PerQ(int64_t)> worker = [&](int64_t q) {
        double logq = std::log(static_cast<double>(q));
        double plim = std::pow(static_cast<double>(q), cfg.phi.sigma);
        std::vector<int64_t> ms{1};                 // 1 first, for the mass
        std::vector<int64_t> pq_primes;
        for (int64_t p : primes) {
            if (static_cast<double>(p) >= plim) break;
            (q % p != 0 ? ms : pq_primes).push_back(p);
        }
        std::vector<double> wp(ms.size(), 0.0);     // prime weights, wp[0] unused
        for (size_t i = 1; i < ms.size(); ++i) {
            double lp = std::log(static_cast<double>(ms[i]));
            wp[i] = lp / std::sqrt(static_cast<double>(ms[i])) * cfg.phi.phi_hat(lp / logq) / logq;
        }

        petersson::FamilyParams fp{cfg.k, q};
        auto plan = petersson::star_plan(fp, ms, 1, cfg.policy);

        PerQ out;
        kahan_sum s1, tail, mass;
        double wp_abs_tau = 0.0;  // sum over p of |wp| tau(p)
        for (size_t i = 1; i < ms.size(); ++i) wp_abs_tau += std::abs(wp[i]) * 2.0;

        for (auto& job : plan.jobs) {
            int64_t L1L2 = job.t.L1 * job.t.L2;
            bool dropped = (l0_cap > 0 && L1L2 >= l0_cap) || (e_cap > 0 && job.e >= e_cap);
            int64_t ne2 = job.e * job.e;
            if (dropped) {
                double md = petersson::delta_mass_bound(cfg.k, job.t.d);
                double te2 = 1.0;
                for (auto& [p, a] : arith::factor(ne2).factors) te2 *= a + 1;
                out.discard += std::abs(job.weight) * wp_abs_tau * te2 * md;
                // the mass term Delta*(1,1) keeps every job: caps apply to Sigma1 only
            }
            int64_t max_cut = *std::max_element(job.cut.begin(), job.cut.end());
            // diagonal contribution: only m = 1, e = 1
            if (ne2 == 1) mass.add(job.weight);
            for (int64_t c = 1; c <= max_cut; ++c) {
                int64_t cd = c * job.t.d;
                arith::KloostermanTable table(cd);
                thread_local std::vector<int64_t> act;
                thread_local std::vector<size_t> idx;
                thread_local std::vector<double> kl;
                act.clear();
                idx.clear();
                for (size_t i = 0; i < ms.size(); ++i)
                    if (c <= job.cut[i]) {
                        act.push_back(ms[i]);
                        idx.push_back(i);
                    }
                if (act.empty()) break;
                kl.resize(act.size());
                table.batch(act, ne2, kl.data());
                for (size_t a = 0; a < idx.size(); ++a) {
                    size_t i = idx[a];
                    double arg = 2.0 * two_pi *
                                 std::sqrt(static_cast<double>(ms[i]) * static_cast<double>(ne2)) /
                                 static_cast<double>(cd);
                    auto J = specfun::bessel_j(cfg.k - 1, arg);
                    double term =
                        job.weight * two_pi * sign * kl[a] / static_cast<double>(cd) * J.value;
                    if (i == 0) {
                        mass.add(term);
                    } else if (!dropped) {
                        s1.add(wp[i] * term);
                        tail.add(std::abs(wp[i] * job.weight) * two_pi * std::abs(kl[a]) /
                                 static_cast<double>(cd) * J.est_abs_error);
                    }
                }
                // fill-in of p | q, sharing the job's widest cutoff
                if (fill_in_pq && !dropped && !pq_primes.empty()) {
                    thread_local std::vector<double> klq;
                    klq.resize(pq_primes.size());
                    table.batch(pq_primes, ne2, klq.data());
                    for (size_t a = 0; a < pq_primes.size(); ++a) {
                        int64_t p = pq_primes[a];
                        double lp = std::log(static_cast<double>(p));
                        double w = lp / std::sqrt(static_cast<double>(p)) *
                                   cfg.phi.phi_hat(lp / logq) / logq;
                        double arg = 2.0 * two_pi *
                                     std::sqrt(static_cast<double>(p) * static_cast<double>(ne2)) /
                                     static_cast<double>(cd);
                        auto J = specfun::bessel_j(cfg.k - 1, arg);
                        out.fill += w * job.weight * two_pi * sign * klq[a] /
                                    static_cast<double>(cd) * J.value;
                    }
                }
            }
            // c-sum remainders for the prime-weighted blocks
            if (!dropped)
                for (size_t i = 1; i < ms.size(); ++i)
                    tail.add(std::abs(wp[i] * job.weight) *
                             petersson::c_tail_bound(cfg.k, job.t.d, ms[i], ne2, job.cut[i]));
        }
        // e-tail ledger beyond the plan, weighted by the prime sums
        tail.add(plan.etail_unit * wp_abs_tau);

        out.s1 = s1.value() + (fill_in_pq ? out.fill : 0.0);
        out.tail = tail.value();
        out.mass = mass.value();
        return out;
    };
    auto levels = run_levels<PerQ>(grid, cfg.threads, worker);

    kahan_sum num, tails, mass, discard, fill;
    for (size_t i = 0; i < grid.size(); ++i) {
        double w = grid[i].second;
        num.add(w * levels[i].s1);
        tails.add(w * levels[i].tail);
        mass.add(w * levels[i].mass);
        discard.add(w * levels[i].discard);
        fill.add(w * levels[i].fill);
    }
    Sigma1Result r;
    r.n_of_q = mass.value();
    r.value = num.value() / r.n_of_q;
    r.tail_bound = tails.value() / r.n_of_q;
    r.discard_ledger = discard.value() / r.n_of_q;
    r.fill_in = fill.value() / r.n_of_q;
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

PrimeSumResult smoothed_prime_sum(const std::optional<arith::DirichletCharacter>& chi, double t,
                                  const testfn::DyadicWindow& v, double P, double vphase,
                                  int64_t N) {
    if (!(P > 0.0)) throw std::domain_error("smoothed_prime_sum: P must be > 0");
    PrimeSumResult out;
    auto primes = arith::primes_up_to(static_cast<int64_t>(3.0 * P) + 1);
    kahan_csum acc;
    cplx z{0.5, t};
    for (int64_t p : primes) {
        if (N % p == 0) continue;
        double x = static_cast<double>(p) / P;
        double w = v.v(x);
        if (w == 0.0) continue;
        cplx factor = chi ? (*chi)(p) : cplx{1.0, 0.0};
        if (factor == cplx{0.0, 0.0}) continue;
        cplx term = factor * std::log(static_cast<double>(p)) * w * e_of(vphase * x) *
                    std::exp(-z * std::log(static_cast<double>(p)));
        acc.add(term);
    }
    out.sum = acc.value();
    if (!chi) {
        cplx s{0.5, -t};
        auto v1 = [&](double x) -> cplx { return v.v(x) * e_of(vphase * x); };
        cplx mel = testfn::mellin_numeric(v1, s, 0.5, 3.0);
        out.main_term = std::exp(s * std::log(P)) * mel;
        out.residual = out.sum - out.main_term;
    }
    return out;
}

}  // namespace lowzero::density
