#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "qmean/prob.hpp"
#include "qmean/rng.hpp"

namespace qmean {

// Built-in named instances used by the CLI, the verification suite and the
// acceptance experiments.

// Uniform 7-outcome instance with mean ~.196 and second moment ~.1.
inline RandVar fig_aa() {
  return make_rand_var(std::vector<double>(7, 1.0 / 7.0),
                       {-.169, -.032, .101, .148, .258, .511, .557});
}

// Uniform 7-outcome instance used for the rotating-line eigenvector scan.
inline RandVar fig_eigs() {
  return make_rand_var(std::vector<double>(7, 1.0 / 7.0),
                       {.560, .258, .057, -.045, -.088, -.250, -.494});
}

// Search instance: value sqrt(N) on one marked item out of N, 0 elsewhere.
// E[y^2] = 1 when marked; the mean is 1/sqrt(N) or 0.
inline RandVar grover_instance(std::uint64_t n_items, bool marked) {
  if (n_items < 4) throw std::invalid_argument("grover instance needs N >= 4");
  double n = static_cast<double>(n_items);
  if (!marked) return make_rand_var({1.0}, {0.0});
  return make_rand_var({1.0 - 1.0 / n, 1.0 / n}, {0.0, std::sqrt(n)});
}

inline RandVar bernoulli_instance(double p) {
  if (!(p >= 0.0 && p <= 1.0))
    throw std::invalid_argument("bernoulli parameter must be in [0,1]");
  if (p == 0.0) return make_rand_var({1.0}, {0.0});
  if (p == 1.0) return make_rand_var({1.0}, {1.0});
  return make_rand_var({1.0 - p, p}, {0.0, 1.0});
}

// Values 2^k with weights proportional to 4^{-k}; stresses the
// truncation/quantile path of the mean estimator.
inline RandVar heavy_tail() {
  std::vector<double> w(13), v(13);
  double geom = 1.0;
  for (int k = 0; k <= 12; ++k) {
    w[k] = geom;
    v[k] = std::pow(2.0, k);
    geom *= 0.25;
  }
  double sum = 0.0;
  for (double x : w) sum += x;
  for (double& x : w) x /= sum;
  return make_rand_var(w, v);
}

// Random instance with D outcomes and second moment sqrt equal to s_target.
inline RandVar random_instance(Rng& rng, std::size_t dim, double s_target) {
  if (dim < 1) throw std::invalid_argument("dim must be >= 1");
  std::vector<double> w(dim), v(dim);
  double sum = 0.0;
  for (auto& x : w) {
    x = 0.05 + rng.uniform01();
    sum += x;
  }
  for (auto& x : w) x /= sum;
  for (auto& x : v) x = 2.0 * rng.uniform01() - 1.0;
  RandVar raw = make_rand_var(w, v);
  double s = raw.second_moment_sqrt();
  if (s == 0.0) return raw;
  return scale(raw, s_target / s);
}

// Random instance with pairwise distinct values (for the rotating-line
// construction, which needs distinct pole positions).
inline RandVar random_distinct_instance(Rng& rng, std::size_t dim) {
  std::vector<double> w(dim), v(dim);
  double sum = 0.0;
  for (auto& x : w) {
    x = 0.05 + rng.uniform01();
    sum += x;
  }
  for (auto& x : w) x /= sum;
  for (std::size_t l = 0; l < dim; ++l)
    v[l] = -1.0 + (2.0 * l + rng.uniform01()) / static_cast<double>(dim);
  return make_rand_var(w, v);
}

// Rescales an instance so its mean becomes mu_target (sign preserved on
// request); used to build promise-case inputs for the distinguishers.
inline RandVar with_mean(const RandVar& rv, double mu_target) {
  double mu = rv.mean();
  if (mu == 0.0) throw std::invalid_argument("cannot rescale a zero mean");
  return scale(rv, mu_target / mu);
}

}  // namespace qmean
