#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qmean/maintask.hpp"

namespace qmean {

// --- tuning ---------------------------------------------------------------
// Constants the asymptotic statements keep implicit, fixed here once.

// Strict-tail slack of the quantile cap: Pr[|y| > B] <= kQuantileTailSlack/n^2.
inline constexpr double kQuantileTailSlack = 64.0;
// Query budget of the quantile search, as a multiple of n; covers both the
// conditional-draw rounds and the cap-verification rounds.
inline constexpr double kQuantileBudgetFactor = 192.0;
// Cap verification: flips of a randomized-length amplitude test with round
// lengths in [ceil(tmax/2), tmax], tmax = ceil(n/4); a cap is kept when at
// least kQuantileVerifyAccept flips succeed. A rejection is confirmed by a
// second independent test before the search stops.
inline constexpr int kQuantileVerifyFlips = 24;
inline constexpr int kQuantileVerifyAccept = 8;
inline constexpr int kQuantileBackoffSteps = 3;
// Smallest n any of the O(n)-query estimators accepts.
inline constexpr int kMinEstimationN = 4;
// The second-moment estimator runs its internals at kEmsExpansion * n so
// that the truncation bias sqrt(kQuantileTailSlack)*s/n' plus the search
// error fit inside s/n.
inline constexpr int kEmsExpansion = 10;
// estimate_mean runs the second-moment stage at ceil(kCenteringExpansion*n):
// subtracting a sampled value bounds the second moment by 10 sigma^2, and
// sqrt(10) < 3.2.
inline constexpr double kCenteringExpansion = 3.2;
// Ceiling on total queries of estimate_mean, as a multiple of n (asserted
// in the acceptance experiments). Measured medians sit between 5e9 * n and
// 1.6e10 * n depending on the instance.
inline constexpr double kTotalQueryFactor = 2.5e10;

// Confidence schedule over geometrically shrinking accuracy stages:
// delta_j = exp(-C sqrt(eta_j/eta_final)) with the constant C solved
// numerically as the smallest value whose worst-case failure sum stays
// within the target budget.
class LogLogSchedule {
 public:
  LogLogSchedule(double eta_start, double eta_final, double ratio,
                 double total = 1.0 / 3.0)
      : LogLogSchedule(eta_start, eta_final, ratio, std::log(total), Log{}) {
    if (!(total > 0.0 && total < 1.0))
      throw std::invalid_argument("total failure budget must be in (0,1)");
  }

  static LogLogSchedule with_log_budget(double eta_start, double eta_final,
                                        double ratio, double log_total) {
    return LogLogSchedule(eta_start, eta_final, ratio, log_total, Log{});
  }

  double constant() const { return constant_; }
  double eta_final() const { return eta_final_; }

  double delta_for(double eta) const { return std::exp(log_delta_for(eta)); }

  // log of the stage confidence; kept in log space since deep schedules
  // underflow a plain double.
  double log_delta_for(double eta) const {
    double r = std::max(1.0, eta / eta_final_);
    return -constant_ * std::sqrt(r);
  }

  // Worst-case failure sum for stages eta_final * ratio^j, j >= 0: the
  // log of sum_j exp(-c * ratio^{j/2}), including a geometric tail bound.
  static double log_failure_sum(double c, double ratio) {
    double extra = 0.0;  // sum relative to the leading exp(-c) term
    double power = 1.0;  // ratio^{j/2}
    for (int j = 1; j < 100000; ++j) {
      double next = power * std::sqrt(ratio);
      double term = std::exp(-c * (next - 1.0));
      // Terms beyond j are dominated by a geometric series.
      double q = std::exp(-c * next * (std::sqrt(ratio) - 1.0));
      if (q < 1.0 && term * q / (1.0 - q) < 1e-15) {
        extra += term + term * q / (1.0 - q);
        break;
      }
      extra += term;
      power = next;
    }
    return -c + std::log1p(extra);
  }

  static double solve_constant(double ratio, double log_total) {
    if (!(ratio > 1.0)) throw std::invalid_argument("ratio must exceed 1");
    if (!(log_total <= 0.0))
      throw std::invalid_argument("failure budget must not exceed 1");
    struct Key {
      double ratio, log_total;
      bool operator<(const Key& o) const {
        return ratio < o.ratio ||
               (ratio == o.ratio && log_total < o.log_total);
      }
    };
    static std::map<Key, double>* cache = new std::map<Key, double>();
    static std::mutex mu;
    {
      std::lock_guard<std::mutex> lock(mu);
      auto it = cache->find({ratio, log_total});
      if (it != cache->end()) return it->second;
    }
    double lo = 1e-3, hi = 1.0;
    while (log_failure_sum(hi, ratio) > log_total) {
      lo = hi;
      hi *= 2.0;
      if (hi > 1e9) throw std::logic_error("schedule constant out of range");
    }
    while (hi - lo > 1e-6 * std::max(1.0, hi)) {
      double mid = 0.5 * (lo + hi);
      if (log_failure_sum(mid, ratio) <= log_total)
        hi = mid;
      else
        lo = mid;
    }
    std::lock_guard<std::mutex> lock(mu);
    (*cache)[{ratio, log_total}] = hi;
    return hi;
  }

 private:
  struct Log {};
  LogLogSchedule(double eta_start, double eta_final, double ratio,
                 double log_total, Log)
      : eta_start_(eta_start), eta_final_(eta_final), ratio_(ratio) {
    if (!(eta_start >= eta_final && eta_final > 0.0))
      throw std::invalid_argument("schedule needs eta_start >= eta_final > 0");
    if (!(ratio > 1.0)) throw std::invalid_argument("ratio must exceed 1");
    constant_ = solve_constant(ratio, log_total);
  }

  double eta_start_, eta_final_, ratio_;
  double constant_ = 0.0;
};

struct StageRecord {
  std::string stage;
  double eta = 0.0;
  double delta = 0.0;
  double value = 0.0;
  std::string note;
};

// Stage confidence combining two valid budget splits: the
// accuracy-anchored schedule (cheap at the deep stages) and a plain
// geometric split (cheap at the early stages). delta_j is a quarter of the
// larger share, so the union over stages stays within half the budget.
class HybridSchedule {
 public:
  HybridSchedule(double eta_start, double eta_final, double ratio,
                 double log_budget)
      : log_budget_(log_budget), eta_final_(std::min(eta_start, eta_final)) {
    anchored_constant_ = LogLogSchedule::solve_constant(ratio, 0.0);
  }

  double log_delta_for(int stage_index, double eta) const {
    double anchored =
        -anchored_constant_ * std::sqrt(std::max(1.0, eta / eta_final_));
    double geometric = -(stage_index + 1) * std::log(2.0);
    return log_budget_ - std::log(4.0) + std::max(anchored, geometric);
  }

 private:
  double log_budget_;
  double eta_final_;
  double anchored_constant_ = 0.0;
};

struct EstimateResult {
  double mu_hat = 0.0;
  std::uint64_t queries_used = 0;
  std::vector<StageRecord> trace;
};

enum class QuantileMode { kSimulated, kOracle };

namespace detail {

// Binary search for the mean via the shifted main task (gap constant 1/2):
// verdict "large" discards the left half of the interval, verdict "small"
// keeps the left three quarters; both are safe even between the promise
// cases. Stage confidences follow the hybrid schedule, realized by
// exact-binomial majority reps of the distinguisher. Callers with an a
// priori range for the mean may pass a narrower starting interval.
inline double mean_s1_log(const RandVar& rv, double eps, double log_delta,
                          Rng& rng, QueryLedger& ledger,
                          std::vector<StageRecord>* trace = nullptr,
                          double lo = -1.0, double hi = 1.0) {
  double a = lo, b = hi;
  HybridSchedule sched((b - a) / 2.0, eps / 2.0, 4.0 / 3.0, log_delta);
  int guard = 0;
  int stage = 0;
  while (b - a > eps) {
    if (++guard > 400) throw std::logic_error("binary search failed to stop");
    double eps_j = (b - a) / 2.0;
    double mu_hat = a + 0.5 * eps_j;
    double log_delta_j = sched.log_delta_for(stage++, eps_j);
    int reps = reps_for_log_confidence(log_delta_j);
    QpeDistinguisher dist(shifted_halved(rv, mu_hat), eps_j / 2.0);
    int large = 0;
    for (int r = 0; r < reps; ++r)
      if (dist.run_fast(rng, ledger) == Verdict::kLarge) ++large;
    bool is_large = 2 * large > reps;
    if (trace)
      trace->push_back({"search", eps_j, std::exp(log_delta_j), mu_hat,
                        is_large ? "large" : "small"});
    if (is_large)
      a += eps_j;  // excludes [a, a + c|I|)
    else
      b = a + 0.75 * (b - a);
  }
  return 0.5 * (a + b);
}

inline double mean_s1(const RandVar& rv, double eps, double delta, Rng& rng,
                      QueryLedger& ledger,
                      std::vector<StageRecord>* trace = nullptr) {
  return mean_s1_log(rv, eps, std::log(delta), rng, ledger, trace);
}

// Successive halving for a {0,1}-valued variable. Maintains an upper bound
// p_bar, lowering it by 3/4 while the stage estimate allows, until either
// a factor-2 estimate is certified or p_bar falls below 1/(4n^2).
inline double bernoulli_mean(const RandVar& rv, int n, double delta, Rng& rng,
                             QueryLedger& ledger,
                             std::vector<StageRecord>* trace = nullptr) {
  double dn = static_cast<double>(n);
  // Reduce to p <= 3/4: one eps = 1/4 estimate, flip if it lands >= 1/2.
  double mu0 = mean_s1_log(rv, 0.25, std::log(delta / 4.0), rng, ledger,
                           trace, 0.0, 1.0);
  bool flipped = mu0 >= 0.5;
  RandVar work = flipped ? shift(scale(rv, -1.0), 1.0) : rv;
  if (trace)
    trace->push_back({"halving", 0.25, delta / 4.0, mu0,
                      flipped ? "flip" : "keep"});

  double p_bar = 0.75;
  double p_hat = -1.0;
  double floor_p = 1.0 / (4.0 * dn * dn);
  HybridSchedule sched(0.25 * std::sqrt(0.75),
                       std::min(0.25 * std::sqrt(floor_p), 0.25),
                       2.0 / std::sqrt(3.0), std::log(delta / 2.0));
  int guard = 0;
  int stage = 0;
  while (p_bar > floor_p) {
    if (++guard > 400) throw std::logic_error("halving failed to stop");
    double eta = 0.25 * std::sqrt(p_bar);
    double log_delta_j = sched.log_delta_for(stage++, eta);
    RandVar scaled = scale(work, 1.0 / std::sqrt(p_bar));
    // The mean of the scaled variable lies in [0, sqrt(p_bar)] while the
    // upper-bound invariant holds, so the search starts there.
    double mu_scaled = mean_s1_log(scaled, eta, log_delta_j, rng, ledger,
                                   nullptr, 0.0, std::sqrt(p_bar));
    double p_prime = mu_scaled * std::sqrt(p_bar);
    if (trace)
      trace->push_back({"halving", eta, std::exp(log_delta_j), p_prime, ""});
    if (p_prime < 0.5 * p_bar) {
      p_bar *= 0.75;
    } else {
      p_hat = 0.5 * p_bar;
      break;
    }
  }

  double p_est = 0.0;
  if (p_hat > 0.0) {
    RandVar final_rv = scale(work, 1.0 / std::sqrt(2.0 * p_hat));
    double mu_f =
        mean_s1_log(final_rv, 1.0 / (4.0 * dn), std::log(delta / 4.0), rng,
                    ledger, trace, 0.0, std::sqrt(p_bar));
    p_est = std::clamp(mu_f * std::sqrt(2.0 * p_hat), 0.0, 1.0);
  }
  return flipped ? 1.0 - p_est : p_est;
}

inline double bounded01_mean(const RandVar& rv, int n, double delta, Rng& rng,
                             QueryLedger& ledger,
                             std::vector<StageRecord>* trace = nullptr) {
  return bernoulli_mean(bernoullize(rv), n, delta, rng, ledger, trace);
}

// Quantile cap search. Oracle mode reads the exact tail. Simulated mode
// follows the sequential amplitude-estimation sketch: rounds of amplitude
// amplification against the projector onto outcomes above the current cap,
// with round lengths drawn from geometrically growing windows, under a
// total query budget of kQuantileBudgetFactor * n. Each round costs
// 4*T + 1 (T iterate applications plus the state preparation). Candidate
// caps found by expensive draws are kept only if a randomized-length
// amplitude test against {|y| >= candidate} comes up positive, which stops
// the descent near the target tail scale instead of wherever the budget
// happens to run out; the adopted cap is re-tested before being returned,
// backing off to earlier caps on failure.
class QuantileSearch {
 public:
  QuantileSearch(const RandVar& rv_abs, int n, Rng& rng, QueryLedger& ledger)
      : rng_(rng), ledger_(ledger), n_(static_cast<double>(n)) {
    std::vector<std::pair<double, double>> vw(rv_abs.size());
    for (std::size_t l = 0; l < rv_abs.size(); ++l)
      vw[l] = {rv_abs.value(l), rv_abs.weight(l)};
    std::sort(vw.begin(), vw.end(),
              [](auto& a, auto& b) { return a.first > b.first; });
    double cum = 0.0;
    for (auto& [v, w] : vw) {
      cum += w;
      if (!levels_.empty() && levels_.back().first == v)
        levels_.back().second = cum;
      else
        levels_.push_back({v, cum});
    }
  }

  double oracle() const {
    double target = 1.0 / (n_ * n_);
    for (auto& [v, tail_ge] : levels_)
      if (tail_ge >= target) return v;
    return levels_.back().first;
  }

  double simulated() {
    budget_ = kQuantileBudgetFactor * n_;
    auto tmax = static_cast<std::uint64_t>(std::max(1.0, std::ceil(n_ / 4.0)));
    auto tskip = static_cast<std::uint64_t>(std::max(1.0, std::ceil(n_ / 8.0)));

    double cap = -1.0;
    bool drawn = false;
    std::vector<double> adopted;
    while (!exhausted_) {
      double cand = 0.0;
      std::uint64_t t_succ = 0;
      if (!draw(cap, &cand, &t_succ)) break;
      drawn = true;
      if (t_succ >= tskip && !verify_twice(cand, tmax)) break;
      cap = cand;
      adopted.push_back(cand);
    }
    if (!drawn)
      throw std::runtime_error(
          "quantile search exhausted its budget without any draw");
    // Every draw was rejected: the only certified level is the global
    // floor, whose inclusive tail is 1.
    if (adopted.empty()) return levels_.back().first;
    for (int back = 0; back < kQuantileBackoffSteps && adopted.size() > 1;
         ++back) {
      if (exhausted_ || verify_twice(adopted.back(), tmax)) break;
      adopted.pop_back();
    }
    return adopted.back();
  }

 private:
  double tail_above(double x, bool inclusive) const {
    double t = 0.0;
    for (auto& [v, tail_ge] : levels_) {
      if (v > x || (inclusive && v == x))
        t = tail_ge;
      else
        break;
    }
    return t;
  }

  bool charge(double cost) {
    if (spent_ + cost > budget_) {
      exhausted_ = true;
      return false;
    }
    spent_ += cost;
    ledger_.charge(static_cast<std::uint64_t>(cost));
    return true;
  }

  // One amplification round of length t against tail mass q.
  bool aa_round(std::uint64_t t, double q) {
    double phi = std::asin(std::min(1.0, std::sqrt(q)));
    double amp = std::sin((2.0 * static_cast<double>(t) + 1.0) * phi);
    return rng_.bernoulli(amp * amp);
  }

  // Growing-window rounds against {|y| > cap} until a measurement succeeds;
  // on success the conditional outcome becomes the candidate.
  bool draw(double cap, double* cand, std::uint64_t* t_succ) {
    double q = tail_above(cap, false);
    double window_lo = 1.0, window_hi = 6.0 / 5.0;
    while (true) {
      auto lo = static_cast<std::uint64_t>(std::ceil(window_lo));
      auto hi =
          std::max(lo, static_cast<std::uint64_t>(std::floor(window_hi)));
      std::uint64_t t = lo + rng_.below(hi - lo + 1);
      if (!charge(4.0 * static_cast<double>(t) + 1.0)) return false;
      if (aa_round(t, q)) {
        double u = rng_.uniform01() * q;
        *cand = levels_.front().first;
        for (auto& [v, tail_ge] : levels_) {
          if (!(v > cap)) break;
          if (u < tail_ge) {
            *cand = v;
            break;
          }
        }
        *t_succ = t;
        return true;
      }
      window_lo = window_hi;
      window_hi *= 6.0 / 5.0;
    }
  }

  bool verify_once(double cand, std::uint64_t tmax) {
    double q = tail_above(cand, true);
    std::uint64_t tlo = std::max<std::uint64_t>(1, (tmax + 1) / 2);
    int succ = 0;
    for (int i = 0; i < kQuantileVerifyFlips; ++i) {
      std::uint64_t t = tlo + rng_.below(tmax - tlo + 1);
      if (!charge(4.0 * static_cast<double>(t) + 1.0)) return false;
      if (aa_round(t, q)) ++succ;
    }
    return succ >= kQuantileVerifyAccept;
  }

  bool verify_twice(double cand, std::uint64_t tmax) {
    if (verify_once(cand, tmax)) return true;
    if (exhausted_) return false;
    return verify_once(cand, tmax);
  }

  Rng& rng_;
  QueryLedger& ledger_;
  double n_;
  std::vector<std::pair<double, double>> levels_;  // value, P[|y| >= value]
  double budget_ = 0.0;
  double spent_ = 0.0;
  bool exhausted_ = false;
};

inline double quantile_cap(const RandVar& rv_abs, int n, Rng& rng,
                           QueryLedger& ledger, QuantileMode mode) {
  QuantileSearch search(rv_abs, n, rng, ledger);
  return mode == QuantileMode::kOracle ? search.oracle() : search.simulated();
}

// Mean to within s/n: cap via the quantile search, truncate and rescale,
// estimate the second moment to a factor 2, then binary-search the mean of
// the renormalized variable. All internals run at n' = kEmsExpansion * n.
inline double mean_second_moment(const RandVar& rv, int n, double delta,
                                 Rng& rng, QueryLedger& ledger,
                                 std::vector<StageRecord>* trace = nullptr) {
  int np = kEmsExpansion * n;
  double dnp = static_cast<double>(np);
  double cap = quantile_cap(abs_value(rv), np, rng, ledger,
                            QuantileMode::kSimulated);
  if (trace) trace->push_back({"quantile", 0.0, delta / 8.0, cap, ""});
  if (cap <= 0.0) return 0.0;

  RandVar unit = scale(truncate(rv, cap), 1.0 / cap);
  RandVar z = square(unit);
  double z_hat = bounded01_mean(z, 2 * np, 3.0 * delta / 8.0, rng, ledger,
                                nullptr);
  z_hat = std::clamp(z_hat, 1.0 / (4.0 * dnp * dnp), 1.0);
  double s_hat = std::sqrt(z_hat);
  if (trace)
    trace->push_back({"second_moment", 0.0, 3.0 * delta / 8.0, z_hat, ""});

  // |mean| of the final variable is at most s''/(2 s_hat) <= 3/4 while the
  // factor-2 estimate holds.
  RandVar final_rv = scale(unit, 1.0 / (2.0 * s_hat));
  double mu_f = mean_s1_log(final_rv, 1.0 / (4.0 * dnp),
                            std::log(3.0 * delta / 8.0), rng, ledger, trace,
                            -0.75, 0.75);
  return mu_f * 2.0 * s_hat * cap;
}

}  // namespace detail

// --- public estimators ------------------------------------------------

// Mean to within eps for variables promised E[y^2] <= 1, using O(1/eps)
// queries; correct with probability >= 2/3.
inline EstimateResult estimate_mean_s1(const RandVar& rv, double eps, Rng& rng,
                                       QueryLedger& ledger) {
  if (!(eps > 0.0 && eps <= 1.0))
    throw std::invalid_argument("eps must lie in (0, 1]");
  if (rv.second_moment_sqrt() > 1.0 + 1e-12)
    throw std::invalid_argument("estimate_mean_s1 requires E[y^2] <= 1");
  EstimateResult out;
  std::uint64_t before = ledger.count();
  out.mu_hat = detail::mean_s1(rv, eps, 1.0 / 3.0, rng, ledger, &out.trace);
  out.queries_used = ledger.count() - before;
  return out;
}

// Mean of a {0,1}-valued variable to within stddev/n with O(n) queries.
inline EstimateResult estimate_bernoulli(const RandVar& rv, int n, Rng& rng,
                                         QueryLedger& ledger) {
  if (n < 1) throw std::invalid_argument("n must be positive");
  for (std::size_t l = 0; l < rv.size(); ++l)
    if (rv.value(l) != 0.0 && rv.value(l) != 1.0)
      throw std::invalid_argument("estimate_bernoulli needs {0,1} values");
  EstimateResult out;
  std::uint64_t before = ledger.count();
  out.mu_hat =
      detail::bernoulli_mean(rv, n, 1.0 / 3.0, rng, ledger, &out.trace);
  out.queries_used = ledger.count() - before;
  return out;
}

// Mean of a [0,1]-valued variable to within sqrt(mu)/n with O(n) queries.
inline EstimateResult estimate_bounded01(const RandVar& rv, int n, Rng& rng,
                                         QueryLedger& ledger) {
  if (n < 1) throw std::invalid_argument("n must be positive");
  for (std::size_t l = 0; l < rv.size(); ++l)
    if (rv.value(l) < 0.0 || rv.value(l) > 1.0)
      throw std::invalid_argument("estimate_bounded01 needs values in [0,1]");
  EstimateResult out;
  std::uint64_t before = ledger.count();
  out.mu_hat =
      detail::bounded01_mean(rv, n, 1.0 / 3.0, rng, ledger, &out.trace);
  out.queries_used = ledger.count() - before;
  return out;
}

// Mean to within sigma_bound/n given a promised bound on the standard
// deviation: subtract one sampled value (so the second moment is controlled
// by the variance), then binary-search at accuracy 1/(4n).
inline EstimateResult estimate_with_sigma_bound(const RandVar& rv, int n,
                                                double sigma_bound, Rng& rng,
                                                QueryLedger& ledger) {
  if (n < 1) throw std::invalid_argument("n must be positive");
  if (!(sigma_bound >= 0.0))
    throw std::invalid_argument("sigma bound must be >= 0");
  EstimateResult out;
  std::uint64_t before = ledger.count();
  if (sigma_bound == 0.0) {
    out.mu_hat = draw(rv, rng, ledger);
    out.trace.push_back({"single_draw", 0.0, 0.0, out.mu_hat, "sigma = 0"});
  } else {
    RandVar scaled = scale(rv, 1.0 / (4.0 * sigma_bound));
    double m = draw(scaled, rng, ledger);
    RandVar centered = shift(scaled, -m);
    out.trace.push_back({"typical_draw", 0.0, 0.25, m, ""});
    double mu_c = detail::mean_s1(centered, 1.0 / (4.0 * n), 1.0 / 12.0, rng,
                                  ledger, &out.trace);
    out.mu_hat = (mu_c + m) * 4.0 * sigma_bound;
  }
  out.queries_used = ledger.count() - before;
  return out;
}

// Cap value B for |y| with P[|y| >= B] >= 1/n^2 and
// P[|y| > B] <= kQuantileTailSlack/n^2 (exactly in oracle mode, with high
// probability in simulated mode).
inline double estimate_quantile(const RandVar& rv_abs, int n, Rng& rng,
                                QueryLedger& ledger, QuantileMode mode) {
  if (n < kMinEstimationN)
    throw std::invalid_argument("quantile estimation needs n >= 4");
  for (std::size_t l = 0; l < rv_abs.size(); ++l)
    if (rv_abs.value(l) < 0.0)
      throw std::invalid_argument("quantile estimation needs values >= 0");
  return detail::quantile_cap(rv_abs, n, rng, ledger, mode);
}

// Mean to within s/n = sqrt(E[y^2])/n with O(n) queries.
inline EstimateResult estimate_mean_secondmoment(const RandVar& rv, int n,
                                                 Rng& rng,
                                                 QueryLedger& ledger) {
  if (n < kMinEstimationN)
    throw std::invalid_argument("estimation needs n >= 4");
  EstimateResult out;
  std::uint64_t before = ledger.count();
  out.mu_hat = detail::mean_second_moment(rv, n, 1.0 / 3.0, rng, ledger,
                                          &out.trace);
  out.queries_used = ledger.count() - before;
  return out;
}

// Mean to within sigma/n with O(n) queries and no prior information:
// subtract one sampled value, then run the second-moment estimator.
inline EstimateResult estimate_mean(const RandVar& rv, int n, Rng& rng,
                                    QueryLedger& ledger) {
  if (n < kMinEstimationN)
    throw std::invalid_argument("estimation needs n >= 4");
  EstimateResult out;
  std::uint64_t before = ledger.count();
  double m = draw(rv, rng, ledger);
  out.trace.push_back({"typical_draw", 0.0, 0.25, m, ""});
  RandVar centered = shift(rv, -m);
  int np = static_cast<int>(std::ceil(kCenteringExpansion * n));
  out.mu_hat = m + detail::mean_second_moment(centered, np, 1.0 / 12.0, rng,
                                              ledger, &out.trace);
  out.queries_used = ledger.count() - before;
  return out;
}

}  // namespace qmean
