#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <stdexcept>
#include <vector>

#include "qmean/spectral.hpp"

namespace qmean {

// Phase estimation over a T-point time grid: controlled-U is applied
// t = 1..T-1 times (T-1 unitary uses), and the outcome k in [0,T) follows
// the exact kernel Pr[k | theta] = |(1/T) sum_{t<T} e^{it(theta - 2pi k/T)}|^2.
// The grid is sized so that the outcome couples to the idealized phase
// sample: Pr[|theta' - theta| > accuracy] <= confidence, via the standard
// tail bound 1/(2(g-1)) at g grid cells of slack.
struct QpeConfig {
  double accuracy = 0.0;
  double confidence = 0.0;
  std::uint64_t grid = 2;

  std::uint64_t controlled_applications() const { return grid - 1; }
  std::uint64_t query_cost() const {
    return QueryLedger::kUnitaryCost * controlled_applications();
  }

  static QpeConfig for_accuracy(double accuracy, double confidence) {
    if (!(accuracy > 0.0) || !(confidence > 0.0 && confidence < 1.0))
      throw std::invalid_argument("bad phase estimation parameters");
    QpeConfig cfg;
    cfg.accuracy = accuracy;
    cfg.confidence = confidence;
    double slack = std::ceil(1.0 / (2.0 * confidence) + 1.0);
    double t = std::ceil(kTwoPi * slack / accuracy);
    if (t < 2.0) t = 2.0;
    cfg.grid = static_cast<std::uint64_t>(t);
    return cfg;
  }

  static QpeConfig with_grid(std::uint64_t grid) {
    if (grid < 2) throw std::invalid_argument("grid must have >= 2 points");
    QpeConfig cfg;
    cfg.grid = grid;
    cfg.accuracy = kTwoPi / static_cast<double>(grid);
    cfg.confidence = 0.5;
    return cfg;
  }
};

// Exact kernel mass of outcome k given true phase theta.
inline double qpe_kernel(double theta, std::uint64_t grid, std::uint64_t k) {
  double t = static_cast<double>(grid);
  double delta = theta - kTwoPi * static_cast<double>(k) / t;
  double s = std::sin(delta / 2.0);
  if (s == 0.0) return 1.0;
  double num = std::sin(t * delta / 2.0);
  double v = (num * num) / (t * t * s * s);
  return v;
}

// Idealized phase estimation: a draw from Theta itself, no query cost.
inline double sample_ideal_phase(const ThetaDistribution& td, Rng& rng) {
  return td.thetas[td.sample_index(rng)];
}

namespace detail {

// Draws the grid outcome k for a fixed eigenphase by walking outward from
// the nearest grid point in order of distance; the kernel mass at circular
// grid distance d decays like 1/d^2, so the walk terminates after O(log T)
// cells in expectation.
inline std::uint64_t sample_qpe_outcome(double theta, std::uint64_t grid,
                                        Rng& rng) {
  const double t = static_cast<double>(grid);
  const auto g = static_cast<std::int64_t>(grid);
  auto wrap_cell = [&](std::int64_t k) {
    std::int64_t m = k % g;
    return static_cast<std::uint64_t>(m < 0 ? m + g : m);
  };
  std::int64_t center =
      static_cast<std::int64_t>(std::llround(theta * t / kTwoPi));
  double u = rng.uniform01();
  std::uint64_t last = wrap_cell(center);
  // d = 0..floor(g/2) visits every cell exactly once (the -side of the
  // farthest step duplicates the +side when g is even).
  for (std::int64_t d = 0; d <= g / 2; ++d) {
    for (int sign : {+1, -1}) {
      if (d == 0 && sign < 0) continue;
      if (g % 2 == 0 && d == g / 2 && sign < 0) continue;
      std::uint64_t cell = wrap_cell(center + sign * d);
      double mass = qpe_kernel(theta, grid, cell);
      last = cell;
      if (u < mass) return cell;
      u -= mass;
    }
  }
  return last;  // floating-point residue; the farthest cell
}

}  // namespace detail

// Kernel-exact phase estimation sample: eigenindex first (phase estimation
// commutes with the eigenprojectors), then the grid outcome for that
// eigenphase. Returns the wrapped angle in (-pi, pi] and charges
// 4*(T-1) for the controlled applications.
inline double sample_qpe(const ThetaDistribution& td, const QpeConfig& cfg,
                         Rng& rng, QueryLedger& ledger) {
  ledger.charge(cfg.query_cost());
  double theta = td.thetas[td.sample_index(rng)];
  std::uint64_t k = detail::sample_qpe_outcome(theta, cfg.grid, rng);
  return wrap_angle(kTwoPi * static_cast<double>(k) /
                    static_cast<double>(cfg.grid));
}

// Exact probability that the grid outcome lands strictly inside the angular
// window |theta'| < threshold, given true phase theta. Used to batch
// verdict sampling: the window spans O(threshold*T/2pi) cells.
inline double qpe_window_mass(double theta, std::uint64_t grid,
                              double threshold) {
  if (threshold > kPi) return 1.0;
  const double t = static_cast<double>(grid);
  const auto g = static_cast<std::int64_t>(grid);
  auto kmax = static_cast<std::int64_t>(
      std::ceil(threshold * t / kTwoPi));
  kmax = std::min<std::int64_t>(kmax, (g - 1) / 2);
  KahanSum acc;
  for (std::int64_t k = -kmax; k <= kmax; ++k) {
    double angle = wrap_angle(kTwoPi * static_cast<double>(k) / t);
    if (!(std::abs(angle) < threshold)) continue;
    std::int64_t m = k % g;
    std::uint64_t cell = static_cast<std::uint64_t>(m < 0 ? m + g : m);
    acc.add(qpe_kernel(theta, grid, cell));
  }
  return std::min(1.0, acc.value());
}

// Hadamard test against U^T: returns +1 with probability
// 1/2 + Re<s|U^T s>/2. U^T is computed by T sequential applications to keep
// the accounting faithful; the ledger is charged 4T.
inline int hadamard_test(const PhasedGroverUnitary& u, const CState& s,
                         std::uint64_t t, Rng& rng, QueryLedger& ledger) {
  if (std::abs(norm(s) - 1.0) > 1e-9)
    throw std::invalid_argument("hadamard test needs a unit state");
  ledger.charge(QueryLedger::kUnitaryCost * t);
  CState x = s;
  for (std::uint64_t i = 0; i < t; ++i) x = u.apply_raw(x);
  double accept = 0.5 + 0.5 * inner(s, x).real();
  accept = std::clamp(accept, 0.0, 1.0);
  return rng.uniform01() < accept ? +1 : -1;
}

// Acceptance probability of the Hadamard test, for batched vote sampling.
inline double hadamard_accept_probability(const PhasedGroverUnitary& u,
                                          const CState& s, std::uint64_t t) {
  CState x = s;
  for (std::uint64_t i = 0; i < t; ++i) x = u.apply_raw(x);
  return std::clamp(0.5 + 0.5 * inner(s, x).real(), 0.0, 1.0);
}

// Median of an odd number of independent runs.
inline double boost_median(const std::function<double()>& run, int reps) {
  if (reps < 1 || reps % 2 == 0)
    throw std::invalid_argument("median boosting needs an odd rep count");
  std::vector<double> vals(static_cast<std::size_t>(reps));
  for (auto& v : vals) v = run();
  auto mid = vals.begin() + reps / 2;
  std::nth_element(vals.begin(), mid, vals.end());
  return *mid;
}

// Smallest odd r such that a majority of r trials, each independently
// correct with probability >= 2/3, is correct with probability >= 1-delta,
// where delta = exp(log_delta). Exact binomial tail, evaluated in log space
// (confidence targets from deep schedules underflow as plain doubles).
inline int reps_for_log_confidence(double log_delta) {
  if (!(log_delta < 0.0))
    throw std::invalid_argument("log confidence must be negative");
  if (log_delta >= std::log(1.0 / 3.0)) return 1;

  static std::map<double, int>* cache = new std::map<double, int>();
  static std::mutex mu;
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache->find(log_delta);
    if (it != cache->end()) return it->second;
  }

  auto log_tail = [](int r) {
    // log P[Bin(r, 1/3) >= ceil(r/2)]
    int m = (r + 1) / 2;
    double lp = std::log(1.0 / 3.0), lq = std::log(2.0 / 3.0);
    double best = -1e300;
    std::vector<double> terms;
    terms.reserve(static_cast<std::size_t>(r - m + 1));
    for (int k = m; k <= r; ++k) {
      double lt = std::lgamma(r + 1.0) - std::lgamma(k + 1.0) -
                  std::lgamma(r - k + 1.0) + k * lp + (r - k) * lq;
      terms.push_back(lt);
      best = std::max(best, lt);
    }
    double sum = 0.0;
    for (double lt : terms) sum += std::exp(lt - best);
    return best + std::log(sum);
  };

  double target = log_delta;
  int lo = 1, hi = 3;
  while (log_tail(hi) > target) {
    lo = hi;
    hi = 2 * hi + 1;
    if (hi > 2000001) throw std::logic_error("rep count out of range");
  }
  while (hi - lo > 2) {
    int mid = lo + (hi - lo) / 2;
    if (mid % 2 == 0) ++mid;
    if (log_tail(mid) <= target)
      hi = mid;
    else
      lo = mid;
  }

  std::lock_guard<std::mutex> lock(mu);
  (*cache)[log_delta] = hi;
  return hi;
}

inline int reps_for_confidence(double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
  if (delta >= 1.0 / 3.0) return 1;
  return reps_for_log_confidence(std::log(delta));
}

}  // namespace qmean
