#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <utility>
#include <vector>

#include "qmean/prob.hpp"

namespace qmean {

// Coefficient vector z over the outcome space. The physical state is
// sum_l z_l sqrt(p_l) |l>|garbage_l>, so the inner product is p-weighted:
// <w|z> = sum_l p_l conj(w_l) z_l. Garbage registers never need to be
// materialized; the D coefficients are a complete simulation state.
class CState {
 public:
  CState(SpacePtr space, std::vector<cplx> coeffs)
      : space_(std::move(space)), coeffs_(std::move(coeffs)) {
    if (!space_ || coeffs_.size() != space_->size())
      throw std::invalid_argument("state dimension mismatch");
  }

  std::size_t size() const { return coeffs_.size(); }
  const FiniteProbSpace& space() const { return *space_; }
  const SpacePtr& space_ptr() const { return space_; }
  cplx coeff(std::size_t l) const { return coeffs_[l]; }
  cplx& coeff(std::size_t l) { return coeffs_[l]; }
  const std::vector<cplx>& coeffs() const { return coeffs_; }

 private:
  SpacePtr space_;
  std::vector<cplx> coeffs_;
};

inline cplx inner(const CState& w, const CState& z) {
  if (w.size() != z.size()) throw std::invalid_argument("dimension mismatch");
  KahanSumC acc;
  for (std::size_t l = 0; l < w.size(); ++l)
    acc.add(w.space().weight(l) * std::conj(w.coeff(l)) * z.coeff(l));
  return acc.value();
}

inline double squared_norm(const CState& z) {
  KahanSum acc;
  for (std::size_t l = 0; l < z.size(); ++l)
    acc.add(z.space().weight(l) * std::norm(z.coeff(l)));
  return acc.value();
}

inline double norm(const CState& z) { return std::sqrt(squared_norm(z)); }

// Barycenter E_p[z].
inline cplx expectation(const CState& z) {
  KahanSumC acc;
  for (std::size_t l = 0; l < z.size(); ++l)
    acc.add(z.space().weight(l) * z.coeff(l));
  return acc.value();
}

inline CState ket_one(const SpacePtr& space) {
  return CState(space, std::vector<cplx>(space->size(), cplx(1.0, 0.0)));
}

// Coefficients 1 + i*y_l (unnormalized unless E[y^2] = 0).
inline CState ket_one_plus_iy(const RandVar& rv) {
  std::vector<cplx> c(rv.size());
  for (std::size_t l = 0; l < rv.size(); ++l) c[l] = cplx(1.0, rv.value(l));
  return CState(rv.space_ptr(), std::move(c));
}

inline CState normalized(const CState& z) {
  double n = norm(z);
  if (n <= 0.0) throw std::invalid_argument("cannot normalize a null state");
  std::vector<cplx> c(z.coeffs());
  for (auto& x : c) x /= n;
  return CState(z.space_ptr(), std::move(c));
}

// Product of the barycenter reflection and the value-dependent phase
// rotation. The rotation multiplies coefficient l by e^{i*alpha_l} with
// alpha_l = -2*arctan(y_l), the angle carrying 1 + i*y_l to 1 - i*y_l; the
// reflection maps z to 2*E_p[z] - z. One application (controlled or not)
// costs four uses of the code: two for the reflection, two for the rotation.
class PhasedGroverUnitary {
 public:
  explicit PhasedGroverUnitary(RandVar rv) : rv_(std::move(rv)) {
    alphas_.resize(rv_.size());
    phases_.resize(rv_.size());
    for (std::size_t l = 0; l < rv_.size(); ++l) {
      double y = rv_.value(l);
      alphas_[l] = -2.0 * std::atan(y);
      phases_[l] = std::polar(1.0, alphas_[l]);
      // Defining identity, asserted rather than trusted.
      cplx lhs = phases_[l] * cplx(1.0, y);
      cplx rhs = cplx(1.0, -y);
      if (std::abs(lhs - rhs) > 1e-12 * std::max(1.0, std::abs(y)))
        throw std::logic_error("phase identity violated at construction");
    }
  }

  const RandVar& rand_var() const { return rv_; }
  const SpacePtr& space_ptr() const { return rv_.space_ptr(); }
  std::size_t dim() const { return rv_.size(); }
  const std::vector<double>& alphas() const { return alphas_; }
  const std::vector<cplx>& phases() const { return phases_; }

  CState reflect(const CState& s) const {
    check_space(s);
    cplx bary = expectation(s);
    std::vector<cplx> c(s.size());
    for (std::size_t l = 0; l < s.size(); ++l) c[l] = 2.0 * bary - s.coeff(l);
    return CState(s.space_ptr(), std::move(c));
  }

  CState rotate(const CState& s) const {
    check_space(s);
    std::vector<cplx> c(s.size());
    for (std::size_t l = 0; l < s.size(); ++l) c[l] = phases_[l] * s.coeff(l);
    return CState(s.space_ptr(), std::move(c));
  }

  CState rotate_inverse(const CState& s) const {
    check_space(s);
    std::vector<cplx> c(s.size());
    for (std::size_t l = 0; l < s.size(); ++l)
      c[l] = std::conj(phases_[l]) * s.coeff(l);
    return CState(s.space_ptr(), std::move(c));
  }

  // Simulation-side application; no query accounting.
  CState apply_raw(const CState& s) const { return reflect(rotate(s)); }

  // One metered application: four uses of the code.
  CState apply(const CState& s, QueryLedger& ledger) const {
    check_space(s);
    ledger.charge(QueryLedger::kUnitaryCost);
    return apply_raw(s);
  }

 private:
  void check_space(const CState& s) const {
    if (s.size() != rv_.size() || s.space_ptr().get() != rv_.space_ptr().get())
      throw std::invalid_argument("state is over a different space");
  }

  RandVar rv_;
  std::vector<double> alphas_;
  std::vector<cplx> phases_;
};

}  // namespace qmean
