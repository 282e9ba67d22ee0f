#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qmean/ledger.hpp"
#include "qmean/numeric.hpp"
#include "qmean/rng.hpp"

namespace qmean {

// Finite probability space: strictly positive weights summing to 1.
// Zero-weight outcomes are pruned before construction (see make_rand_var),
// which keeps the weighted inner-product space nondegenerate downstream.
class FiniteProbSpace {
 public:
  explicit FiniteProbSpace(std::vector<double> weights)
      : weights_(std::move(weights)) {
    if (weights_.empty())
      throw std::invalid_argument("probability space needs >= 1 outcome");
    KahanSum total;
    for (double w : weights_) {
      if (!is_finite(w) || w <= 0.0)
        throw std::invalid_argument("weights must be finite and positive");
      total.add(w);
    }
    if (std::abs(total.value() - 1.0) > 1e-12)
      throw std::invalid_argument("weights must sum to 1");
    cdf_.resize(weights_.size());
    double run = 0.0;
    for (std::size_t i = 0; i < weights_.size(); ++i) {
      run += weights_[i];
      cdf_[i] = run;
    }
    cdf_.back() = 1.0;
  }

  std::size_t size() const { return weights_.size(); }
  double weight(std::size_t l) const { return weights_[l]; }
  const std::vector<double>& weights() const { return weights_; }

  std::size_t sample(Rng& rng) const {
    double u = rng.uniform01();
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    if (it == cdf_.end()) --it;
    return static_cast<std::size_t>(it - cdf_.begin());
  }

 private:
  std::vector<double> weights_;
  std::vector<double> cdf_;
};

using SpacePtr = std::shared_ptr<const FiniteProbSpace>;

// Real random variable: values y_l over a finite probability space.
class RandVar {
 public:
  RandVar(SpacePtr space, std::vector<double> values)
      : space_(std::move(space)), values_(std::move(values)) {
    if (!space_) throw std::invalid_argument("null probability space");
    if (values_.size() != space_->size())
      throw std::invalid_argument("values/weights length mismatch");
    for (double v : values_)
      if (!is_finite(v)) throw std::invalid_argument("values must be finite");
    KahanSum m1, m2;
    for (std::size_t l = 0; l < values_.size(); ++l) {
      m1.add(space_->weight(l) * values_[l]);
      m2.add(space_->weight(l) * values_[l] * values_[l]);
    }
    mean_ = m1.value();
    second_moment_ = m2.value();
  }

  const FiniteProbSpace& space() const { return *space_; }
  const SpacePtr& space_ptr() const { return space_; }
  std::size_t size() const { return values_.size(); }
  double value(std::size_t l) const { return values_[l]; }
  double weight(std::size_t l) const { return space_->weight(l); }
  const std::vector<double>& values() const { return values_; }

  double mean() const { return mean_; }
  double second_moment() const { return second_moment_; }
  double variance() const {
    double v = second_moment_ - mean_ * mean_;
    if (v < 0.0) {
      if (v < -1e-12) throw std::logic_error("negative variance");
      v = 0.0;
    }
    return v;
  }
  double stddev() const { return std::sqrt(variance()); }
  double second_moment_sqrt() const { return std::sqrt(second_moment_); }

 private:
  SpacePtr space_;
  std::vector<double> values_;
  double mean_ = 0.0;
  double second_moment_ = 0.0;
};

// Builds a RandVar from raw (weights, values): prunes zero-weight outcomes,
// renormalizes by the exact post-pruning sum. Input weights may deviate from
// sum 1 by up to 1e-9.
inline RandVar make_rand_var(const std::vector<double>& weights,
                             const std::vector<double>& values) {
  if (weights.size() != values.size())
    throw std::invalid_argument("weights/values length mismatch");
  if (weights.empty()) throw std::invalid_argument("empty instance");
  KahanSum total;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!is_finite(weights[i]) || weights[i] < 0.0)
      throw std::invalid_argument("weights must be finite and nonnegative");
    if (!is_finite(values[i]))
      throw std::invalid_argument("values must be finite");
    total.add(weights[i]);
  }
  double sum = total.value();
  if (std::abs(sum - 1.0) > 1e-9)
    throw std::invalid_argument("weights must sum to 1 (tolerance 1e-9)");

  std::vector<double> w, v;
  w.reserve(weights.size());
  v.reserve(values.size());
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] > 0.0) {
      w.push_back(weights[i]);
      v.push_back(values[i]);
    }
  }
  if (w.empty()) throw std::invalid_argument("no outcome has positive weight");

  KahanSum pruned;
  for (double x : w) pruned.add(x);
  double psum = pruned.value();
  // Skip division when the sum is already 1 to the last ulp, so that
  // reconstructing from a constructed instance reproduces it exactly.
  if (std::abs(psum - 1.0) > 4e-16) {
    for (double& x : w) x /= psum;
  }
  return RandVar(std::make_shared<FiniteProbSpace>(std::move(w)),
                 std::move(v));
}

// --- code rewrites (ledger-free transformations) ---

inline RandVar apply_pointwise(const RandVar& rv, auto&& f) {
  std::vector<double> v(rv.size());
  for (std::size_t l = 0; l < rv.size(); ++l) v[l] = f(rv.value(l));
  return RandVar(rv.space_ptr(), std::move(v));
}

inline RandVar shift(const RandVar& rv, double c) {
  if (!is_finite(c)) throw std::invalid_argument("shift must be finite");
  return apply_pointwise(rv, [c](double y) { return y + c; });
}

inline RandVar scale(const RandVar& rv, double c) {
  if (!is_finite(c)) throw std::invalid_argument("scale must be finite");
  return apply_pointwise(rv, [c](double y) { return y * c; });
}

inline RandVar truncate(const RandVar& rv, double bound) {
  if (!is_finite(bound) || bound < 0.0)
    throw std::invalid_argument("truncation bound must be finite and >= 0");
  return apply_pointwise(
      rv, [bound](double y) { return std::clamp(y, -bound, bound); });
}

inline RandVar square(const RandVar& rv) {
  return apply_pointwise(rv, [](double y) { return y * y; });
}

inline RandVar abs_value(const RandVar& rv) {
  return apply_pointwise(rv, [](double y) { return std::abs(y); });
}

// {0,1}-valued version on the doubled space: outcome (l,1) gets weight
// p(l)*y_l, outcome (l,0) gets weight p(l)*(1-y_l). The mean is preserved
// exactly and the second moment of the result equals the original mean.
inline RandVar bernoullize(const RandVar& rv) {
  std::vector<double> w, v;
  w.reserve(2 * rv.size());
  v.reserve(2 * rv.size());
  for (std::size_t l = 0; l < rv.size(); ++l) {
    double y = rv.value(l);
    if (y < 0.0 || y > 1.0)
      throw std::invalid_argument("bernoullize needs values in [0,1]");
    double p = rv.weight(l);
    if (p * y > 0.0) {
      w.push_back(p * y);
      v.push_back(1.0);
    }
    if (p * (1.0 - y) > 0.0) {
      w.push_back(p * (1.0 - y));
      v.push_back(0.0);
    }
  }
  return make_rand_var(w, v);
}

// One classical sample; costs one use of the code.
inline double draw(const RandVar& rv, Rng& rng, QueryLedger& ledger) {
  ledger.charge(1);
  return rv.value(rv.space().sample(rng));
}

}  // namespace qmean
