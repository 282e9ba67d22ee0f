#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

namespace qmean {

using cplx = std::complex<double>;

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;

// Neumaier-compensated accumulator; keeps the tight identity checks honest
// for sums over a thousand terms.
class KahanSum {
 public:
  void add(double x) {
    double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

class KahanSumC {
 public:
  void add(cplx z) {
    re_.add(z.real());
    im_.add(z.imag());
  }
  cplx value() const { return {re_.value(), im_.value()}; }

 private:
  KahanSum re_, im_;
};

// Wraps an angle to the representative in (-pi, pi].
inline double wrap_angle(double theta) {
  double w = std::remainder(theta, kTwoPi);
  if (w <= -kPi) w += kTwoPi;
  return w;
}

// Circular distance between two angles, in [0, pi].
inline double circular_distance(double a, double b) {
  return std::abs(std::remainder(a - b, kTwoPi));
}

inline bool is_finite(double x) { return std::isfinite(x); }

inline double weighted_sum(const std::vector<double>& w,
                           const std::vector<double>& x) {
  KahanSum acc;
  for (std::size_t i = 0; i < w.size(); ++i) acc.add(w[i] * x[i]);
  return acc.value();
}

}  // namespace qmean
