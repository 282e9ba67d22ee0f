#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>

#include "qmean/measure.hpp"

namespace qmean {

enum class Verdict { kSmall, kLarge };

struct MainTaskVerdict {
  Verdict verdict = Verdict::kSmall;
  std::uint64_t queries_used = 0;
  std::optional<double> theta_prime;  // phase-estimation route diagnostic
  int votes_plus = 0;                 // Hadamard routes diagnostic
  int votes_total = 0;
};

// Query ceilings (uses of the code per call, as a multiple of 1/eps),
// asserted in tests. The phase-estimation route applies controlled-U
// ceil(1152*pi/eps) - 1 times after the internal 1/16 rescale.
inline constexpr double kQpeRouteQueryFactor = 14500.0;
inline constexpr double kElementaryRouteQueryFactor = 64.0;
inline constexpr double kElevenRouteQueryFactor = 50500.0;
inline constexpr double kShiftedRouteQueryFactor = 29000.0;

inline constexpr int kElementaryVotes = 15;
inline constexpr int kElevenCoins = 11;
inline constexpr int kElevenFlipsPerCoin = 300;
inline constexpr double kElevenHeadsThreshold = 0.96;

namespace detail {

// Phase-estimation distinguisher with the spectral setup done once, so a
// boosted caller can draw many verdicts cheaply. Both run paths sample the
// same verdict law; run() also reports the sampled phase.
class QpeDistinguisher {
 public:
  QpeDistinguisher(const RandVar& rv, double eps)
      : u_(scale(rv, 1.0 / 16.0)),
        eps_scaled_(eps / 16.0),
        threshold_(1.42 * eps / 16.0),
        cfg_(QpeConfig::for_accuracy(eps / 96.0, 1.0 / 9.0)) {
    SpectralData sd = eigendecompose(u_);
    td_ = theta_distribution(sd, ket_one(u_.space_ptr()));
    KahanSum acc;
    for (std::size_t j = 0; j < td_.size(); ++j)
      acc.add(td_.probs[j] *
              qpe_window_mass(td_.thetas[j], cfg_.grid, threshold_));
    p_small_ = std::min(1.0, acc.value());
  }

  std::uint64_t query_cost() const { return cfg_.query_cost(); }
  double p_small() const { return p_small_; }

  Verdict run_fast(Rng& rng, QueryLedger& ledger) const {
    ledger.charge(cfg_.query_cost());
    return rng.bernoulli(p_small_) ? Verdict::kSmall : Verdict::kLarge;
  }

  Verdict run(Rng& rng, QueryLedger& ledger, double* theta_out) const {
    double tp = sample_qpe(td_, cfg_, rng, ledger);
    if (theta_out) *theta_out = tp;
    return std::abs(tp) < threshold_ ? Verdict::kSmall : Verdict::kLarge;
  }

 private:
  PhasedGroverUnitary u_;
  double eps_scaled_;
  double threshold_;
  QpeConfig cfg_;
  ThetaDistribution td_;
  double p_small_ = 0.0;
};

inline RandVar shifted_halved(const RandVar& rv, double mu_hat) {
  return scale(shift(rv, -mu_hat), 0.5);
}

}  // namespace detail

// Distinguishes |mu| <= eps/2 from |mu| >= eps for variables with
// E[y^2] <= 1, by phase estimation on the starting state and thresholding
// the sampled phase magnitude at 1.42 times the (rescaled) eps. Correct
// with probability >= 2/3 under the promise; O(1/eps) queries.
inline MainTaskVerdict main_task_qpe(const RandVar& rv, double eps, Rng& rng,
                                     QueryLedger& ledger) {
  if (!(eps > 0.0 && eps <= 1.0))
    throw std::invalid_argument("eps must lie in (0, 1]");
  if (rv.second_moment_sqrt() > 1.0 + 1e-12)
    throw std::invalid_argument("main task requires E[y^2] <= 1");
  detail::QpeDistinguisher dist(rv, eps);
  std::uint64_t before = ledger.count();
  MainTaskVerdict out;
  double tp = 0.0;
  out.verdict = dist.run(rng, ledger, &tp);
  out.theta_prime = tp;
  out.queries_used = ledger.count() - before;
  return out;
}

// Elementary route: T = floor(pi/(3 eps)) applications, a majority vote of
// 15 Hadamard tests on the starting state. Callers rescale so that
// s <= 1/4000; the promise is |mu| <= eps/2 or eps <= |mu| <= 2 eps.
inline MainTaskVerdict main_task_elementary(const RandVar& rv, double eps,
                                            Rng& rng, QueryLedger& ledger) {
  if (!(eps > 0.0 && eps <= 3e-4))
    throw std::invalid_argument("elementary route needs eps <= 3e-4");
  if (rv.second_moment_sqrt() > 1.0 / 4000.0 + 1e-15)
    throw std::invalid_argument("elementary route needs s <= 1/4000");
  auto t = static_cast<std::uint64_t>(std::floor(kPi / (3.0 * eps)));
  PhasedGroverUnitary u(rv);
  CState one = ket_one(rv.space_ptr());
  double pp = hadamard_accept_probability(u, one, t);

  std::uint64_t before = ledger.count();
  MainTaskVerdict out;
  out.votes_total = kElementaryVotes;
  for (int v = 0; v < kElementaryVotes; ++v) {
    ledger.charge(QueryLedger::kUnitaryCost * t);
    if (rng.bernoulli(pp)) ++out.votes_plus;
  }
  out.verdict = (2 * out.votes_plus > kElementaryVotes) ? Verdict::kSmall
                                                        : Verdict::kLarge;
  out.queries_used = ledger.count() - before;
  return out;
}

// Eleven-coin route: the possible location range of |theta| under case (ii)
// splits into dyadic intervals [.1 eps, .2 eps], ..., [100 eps, 200 eps];
// T_k = round(2 pi/(3 * .1 * 2^k * eps)) maps the k-th interval onto
// [2pi/3, 4pi/3], where the Hadamard test rejects noticeably often. Small
// is declared only if every coin comes up heads at rate >= .96. The promise
// here is |mu| <= 1e-4 eps or eps <= |mu| <= 2 eps.
inline MainTaskVerdict main_task_eleven_intervals(const RandVar& rv,
                                                  double eps, Rng& rng,
                                                  QueryLedger& ledger) {
  if (!(eps > 0.0 && eps <= 1e-3))
    throw std::invalid_argument("eleven-interval route needs eps <= 1e-3");
  if (rv.second_moment_sqrt() > 1e-3 + 1e-15)
    throw std::invalid_argument("eleven-interval route needs s <= .001");

  std::uint64_t ts[kElevenCoins];
  for (int k = 0; k < kElevenCoins; ++k) {
    double a = 0.1 * std::pow(2.0, k) * eps;
    ts[k] = static_cast<std::uint64_t>(std::llround(kTwoPi / (3.0 * a)));
    if (ts[k] < 1) ts[k] = 1;
  }

  PhasedGroverUnitary u(rv);
  CState one = ket_one(rv.space_ptr());
  double pp[kElevenCoins];
  {
    CState x = one;
    std::uint64_t applied = 0;
    std::uint64_t tmax = ts[0];
    for (std::uint64_t t = 1; t <= tmax; ++t) {
      x = u.apply_raw(x);
      ++applied;
      for (int k = 0; k < kElevenCoins; ++k)
        if (ts[k] == applied)
          pp[k] = std::clamp(0.5 + 0.5 * inner(one, x).real(), 0.0, 1.0);
    }
  }

  std::uint64_t before = ledger.count();
  MainTaskVerdict out;
  out.votes_total = kElevenFlipsPerCoin;
  out.votes_plus = kElevenFlipsPerCoin;
  bool all_heads = true;
  for (int k = 0; k < kElevenCoins; ++k) {
    int heads = 0;
    for (int f = 0; f < kElevenFlipsPerCoin; ++f) {
      ledger.charge(QueryLedger::kUnitaryCost * ts[k]);
      if (rng.bernoulli(pp[k])) ++heads;
    }
    out.votes_plus = std::min(out.votes_plus, heads);
    if (heads < kElevenHeadsThreshold * kElevenFlipsPerCoin) all_heads = false;
  }
  out.verdict = all_heads ? Verdict::kSmall : Verdict::kLarge;
  out.queries_used = ledger.count() - before;
  return out;
}

// Main task against a target mu_hat: shift by -mu_hat, halve, and run the
// phase-estimation route at eps/2. Promise: |mu_hat - mu| <= eps/2 or
// eps <= |mu_hat - mu| <= 2 eps, with s <= 1 for the original variable.
inline MainTaskVerdict main_task_shifted(const RandVar& rv, double eps,
                                         double mu_hat, Rng& rng,
                                         QueryLedger& ledger) {
  if (!(mu_hat >= -1.0 && mu_hat <= 1.0))
    throw std::invalid_argument("mu_hat must lie in [-1, 1]");
  if (!(eps > 0.0 && eps <= 1.0))
    throw std::invalid_argument("eps must lie in (0, 1]");
  if (rv.second_moment_sqrt() > 1.0 + 1e-12)
    throw std::invalid_argument("main task requires E[y^2] <= 1");
  detail::QpeDistinguisher dist(detail::shifted_halved(rv, mu_hat),
                                eps / 2.0);
  std::uint64_t before = ledger.count();
  MainTaskVerdict out;
  double tp = 0.0;
  out.verdict = dist.run(rng, ledger, &tp);
  out.theta_prime = tp;
  out.queries_used = ledger.count() - before;
  return out;
}

}  // namespace qmean
