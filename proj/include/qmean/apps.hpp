#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "qmean/estimate.hpp"
#include "qmean/instances.hpp"

namespace qmean {

// Sample-mean baseline: n draws, one query each.
inline double classical_estimate(const RandVar& rv, int n_samples, Rng& rng,
                                 QueryLedger& ledger) {
  if (n_samples < 1) throw std::invalid_argument("need at least one sample");
  KahanSum acc;
  for (int i = 0; i < n_samples; ++i) acc.add(draw(rv, rng, ledger));
  return acc.value() / n_samples;
}

// Two known distributions over a common outcome set; outcomes may carry
// zero weight under one of them.
struct DistPair {
  std::vector<double> q;
  std::vector<double> r;

  DistPair(std::vector<double> q_in, std::vector<double> r_in)
      : q(std::move(q_in)), r(std::move(r_in)) {
    if (q.size() != r.size() || q.empty())
      throw std::invalid_argument("distributions must share an outcome set");
    for (auto* side : {&q, &r}) {
      KahanSum total;
      for (double w : *side) {
        if (!is_finite(w) || w < 0.0)
          throw std::invalid_argument("weights must be finite, nonnegative");
        total.add(w);
      }
      if (std::abs(total.value() - 1.0) > 1e-9)
        throw std::invalid_argument("weights must sum to 1");
    }
  }

  std::size_t size() const { return q.size(); }

  double bhattacharyya() const {
    KahanSum acc;
    for (std::size_t i = 0; i < q.size(); ++i)
      acc.add(std::sqrt(q[i] * r[i]));
    return acc.value();
  }

  // Squared Hellinger distance, in [0, 2].
  double hellinger_squared() const {
    KahanSum acc;
    for (std::size_t i = 0; i < q.size(); ++i) {
      double d = std::sqrt(q[i]) - std::sqrt(r[i]);
      acc.add(d * d);
    }
    return acc.value();
  }

  double hellinger() const { return std::sqrt(hellinger_squared()); }
};

// Per-outcome values (sqrt(q_i) - sqrt(r_i)) / (sqrt(q_i) + sqrt(r_i)),
// with 0/0 read as 0. Satisfies mu_q - mu_r = H^2 and
// sigma_q^2 + sigma_r^2 <= H^2.
inline std::vector<double> hellinger_values(const DistPair& pair) {
  std::vector<double> y(pair.size());
  for (std::size_t i = 0; i < pair.size(); ++i) {
    double a = std::sqrt(pair.q[i]), b = std::sqrt(pair.r[i]);
    y[i] = (a + b > 0.0) ? (a - b) / (a + b) : 0.0;
  }
  return y;
}

enum class PairSide { kQ, kR };

// The distinguishing variable over one side's probability space.
inline RandVar hellinger_rv(const DistPair& pair, PairSide side) {
  const std::vector<double>& w = side == PairSide::kQ ? pair.q : pair.r;
  return make_rand_var(w, hellinger_values(pair));
}

// Number of mean-estimation steps used to distinguish at Hellinger
// distance H: the estimator error sigma/n <= H/n must resolve H^2/2, so
// any n >= 2/H works; the extra margin suppresses borderline verdicts.
inline int distinguisher_steps(double hellinger) {
  return std::max(kMinEstimationN,
                  static_cast<int>(std::ceil(5.0 / hellinger)));
}

// Decides whether samples come from q or r by estimating the mean of the
// distinguishing variable under the true distribution and picking the
// closer of the two known means. Correct with probability >= 2/3 using
// O(1/H) queries.
inline PairSide distinguish_distributions(const DistPair& pair, PairSide truth,
                                          Rng& rng, QueryLedger& ledger) {
  double h = pair.hellinger();
  if (!(h > 0.0))
    throw std::invalid_argument("distributions must be distinct");
  RandVar rv = hellinger_rv(pair, truth);
  std::vector<double> y = hellinger_values(pair);
  double mu_q = weighted_sum(pair.q, y);
  double mu_r = weighted_sum(pair.r, y);
  int n = distinguisher_steps(h);
  double est = estimate_mean(rv, n, rng, ledger).mu_hat;
  return std::abs(est - mu_q) <= std::abs(est - mu_r) ? PairSide::kQ
                                                      : PairSide::kR;
}

// Classical counterpart at matched confidence: a median of nine sample
// means, each resolving H^2/2 via Chebyshev, so O(1/H^2) draws.
inline PairSide distinguish_distributions_classical(const DistPair& pair,
                                                    PairSide truth, Rng& rng,
                                                    QueryLedger& ledger) {
  double h2 = pair.hellinger_squared();
  if (!(h2 > 0.0))
    throw std::invalid_argument("distributions must be distinct");
  RandVar rv = hellinger_rv(pair, truth);
  std::vector<double> y = hellinger_values(pair);
  double mu_q = weighted_sum(pair.q, y);
  double mu_r = weighted_sum(pair.r, y);
  // sigma^2 <= H^2; sigma/sqrt(n) <= H^2/4 needs n = 16/H^2.
  int n = std::max(1, static_cast<int>(std::ceil(16.0 / h2)));
  double med = boost_median(
      [&]() { return classical_estimate(rv, n, rng, ledger); }, 9);
  return std::abs(med - mu_q) <= std::abs(med - mu_r) ? PairSide::kQ
                                                      : PairSide::kR;
}

enum class GroverVerdict { kZero, kOne };

// Search demo: decides whether zero or one item out of N is marked, with
// O(sqrt(N)) uses of the code.
inline GroverVerdict grover_demo(std::uint64_t n_items, bool marked, Rng& rng,
                                 QueryLedger& ledger) {
  RandVar rv = grover_instance(n_items, marked);
  double eps = 1.0 / std::sqrt(static_cast<double>(n_items));
  MainTaskVerdict v = main_task_qpe(rv, eps, rng, ledger);
  return v.verdict == Verdict::kLarge ? GroverVerdict::kOne
                                      : GroverVerdict::kZero;
}

// Distinguishes a Bernoulli mean of 0 from 1/N quantumly: amplify the
// variable to {0, sqrt(N)} so the main task runs at eps = 1/sqrt(N).
inline bool quantum_bernoulli_is_nonzero(std::uint64_t big_n, bool truth_one,
                                         Rng& rng, QueryLedger& ledger) {
  RandVar rv = grover_instance(big_n, truth_one);
  double eps = 1.0 / std::sqrt(static_cast<double>(big_n));
  return main_task_qpe(rv, eps, rng, ledger).verdict == Verdict::kLarge;
}

// Classical counterpart: 2N draws, verdict "nonzero" on any positive draw.
inline bool classical_bernoulli_is_nonzero(std::uint64_t big_n,
                                           bool truth_one, Rng& rng,
                                           QueryLedger& ledger) {
  RandVar rv = bernoulli_instance(truth_one ? 1.0 / static_cast<double>(big_n)
                                            : 0.0);
  std::uint64_t draws = 2 * big_n;
  bool seen = false;
  for (std::uint64_t i = 0; i < draws; ++i)
    if (draw(rv, rng, ledger) > 0.5) seen = true;
  return seen;
}

}  // namespace qmean
