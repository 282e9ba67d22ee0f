#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qmean/state.hpp"

namespace qmean {

struct EigensolverFailure : std::runtime_error {
  explicit EigensolverFailure(const std::string& what)
      : std::runtime_error(what) {}
};

// Eigenphases theta_j in (-pi, pi], ascending, with eigenvectors orthonormal
// in the p-weighted inner product.
struct SpectralData {
  std::vector<double> eigenphases;
  std::vector<CState> eigenvectors;

  std::size_t dim() const { return eigenphases.size(); }
};

// The unitary conjugated into the orthonormal basis by diag(sqrt(p)):
// (2 vv* - I) diag(e^{i alpha}) with v = sqrt(p).
inline Eigen::MatrixXcd orthonormal_matrix(const PhasedGroverUnitary& u) {
  const auto n = static_cast<Eigen::Index>(u.dim());
  Eigen::MatrixXcd m(n, n);
  std::vector<double> root(u.dim());
  for (std::size_t l = 0; l < u.dim(); ++l)
    root[l] = std::sqrt(u.rand_var().weight(l));
  for (Eigen::Index c = 0; c < n; ++c) {
    cplx ph = u.phases()[static_cast<std::size_t>(c)];
    for (Eigen::Index r = 0; r < n; ++r) {
      double refl = 2.0 * root[static_cast<std::size_t>(r)] *
                        root[static_cast<std::size_t>(c)] -
                    (r == c ? 1.0 : 0.0);
      m(r, c) = refl * ph;
    }
  }
  return m;
}

// Dense eigendecomposition via a Schur factorization in the orthonormal
// basis. For a unitary input the Schur form is diagonal to machine
// precision, so the Schur basis itself is an orthonormal eigenbasis; the
// residual is asserted rather than assumed.
inline SpectralData eigendecompose(const PhasedGroverUnitary& u) {
  const std::size_t n = u.dim();
  Eigen::MatrixXcd m = orthonormal_matrix(u);
  Eigen::ComplexSchur<Eigen::MatrixXcd> schur(m, /*computeU=*/true);
  if (schur.info() != Eigen::Success) {
    std::ostringstream os;
    os << "schur iteration failed to converge (D=" << n << ", values:";
    for (std::size_t l = 0; l < n; ++l) os << ' ' << u.rand_var().value(l);
    os << ")";
    throw EigensolverFailure(os.str());
  }
  const Eigen::MatrixXcd& t = schur.matrixT();
  const Eigen::MatrixXcd& q = schur.matrixU();

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> phase(n);
  for (std::size_t j = 0; j < n; ++j) {
    double th = std::arg(t(static_cast<Eigen::Index>(j),
                           static_cast<Eigen::Index>(j)));
    phase[j] = th <= -kPi ? th + kTwoPi : th;
  }
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return phase[a] < phase[b]; });

  SpectralData sd;
  sd.eigenphases.reserve(n);
  sd.eigenvectors.reserve(n);
  for (std::size_t rank = 0; rank < n; ++rank) {
    std::size_t j = order[rank];
    sd.eigenphases.push_back(phase[j]);
    std::vector<cplx> coeffs(n);
    for (std::size_t l = 0; l < n; ++l)
      coeffs[l] = q(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(j)) /
                  std::sqrt(u.rand_var().weight(l));
    sd.eigenvectors.emplace_back(u.space_ptr(), std::move(coeffs));
  }

  for (std::size_t j = 0; j < n; ++j) {
    CState resid = u.apply_raw(sd.eigenvectors[j]);
    cplx lam = std::polar(1.0, sd.eigenphases[j]);
    KahanSum acc;
    for (std::size_t l = 0; l < n; ++l)
      acc.add(u.rand_var().weight(l) *
              std::norm(resid.coeff(l) - lam * sd.eigenvectors[j].coeff(l)));
    if (std::sqrt(acc.value()) > 1e-9)
      throw EigensolverFailure("eigenvector residual above 1e-9");
  }
  return sd;
}

// hav(theta) = (1 - cos theta)/2 = sin^2(theta/2).
inline double haversine(double theta) {
  double s = std::sin(theta / 2.0);
  return s * s;
}

// Distribution over eigenphases induced by expanding a unit state in the
// eigenbasis; phases within 1e-10 of each other are merged.
struct ThetaDistribution {
  std::vector<double> thetas;
  std::vector<double> probs;

  std::size_t size() const { return thetas.size(); }

  double expectation(auto&& f) const {
    KahanSum acc;
    for (std::size_t j = 0; j < thetas.size(); ++j)
      acc.add(probs[j] * f(thetas[j]));
    return acc.value();
  }

  std::size_t sample_index(Rng& rng) const {
    double u = rng.uniform01();
    double run = 0.0;
    for (std::size_t j = 0; j + 1 < probs.size(); ++j) {
      run += probs[j];
      if (u < run) return j;
    }
    return probs.size() - 1;
  }
};

inline constexpr double kPhaseMergeTolerance = 1e-10;

inline ThetaDistribution theta_distribution(const SpectralData& sd,
                                            const CState& s) {
  if (std::abs(norm(s) - 1.0) > 1e-9)
    throw std::invalid_argument("theta distribution needs a unit state");
  ThetaDistribution td;
  for (std::size_t j = 0; j < sd.dim(); ++j) {
    double q = std::norm(inner(sd.eigenvectors[j], s));
    if (!td.thetas.empty() &&
        std::abs(sd.eigenphases[j] - td.thetas.back()) < kPhaseMergeTolerance) {
      td.probs.back() += q;
    } else {
      td.thetas.push_back(sd.eigenphases[j]);
      td.probs.push_back(q);
    }
  }
  // Wrap-around merge: theta = pi and theta just above -pi are the same
  // eigenvalue neighborhood on the circle.
  if (td.size() > 1 &&
      circular_distance(td.thetas.front(), td.thetas.back()) <
          kPhaseMergeTolerance) {
    td.probs.front() += td.probs.back();
    td.thetas.pop_back();
    td.probs.pop_back();
  }
  KahanSum total;
  for (double q : td.probs) total.add(q);
  if (std::abs(total.value() - 1.0) > 1e-9)
    throw std::logic_error("theta distribution weights do not sum to 1");
  return td;
}

// --- identity and bound checks -------------------------------------------

struct MomentIdentityReport {
  double hav_expect = 0.0;       // E[hav theta] over Theta(|1+iy>/sqrt(1+s^2))
  double hav_closed = 0.0;       // mu^2/(1+s^2)
  double hav_deviation = 0.0;
  double inv_expect = 0.0;       // E[1/hav theta] over Theta(|1>)
  double inv_closed = 0.0;       // (1+s^2)/mu^2
  double inv_deviation = 0.0;
  bool reciprocal_skipped = false;
  std::string skip_reason;
};

// Checks the two haversine moment identities against their closed forms.
// The reciprocal identity requires mu != 0 and no weight on a zero
// eigenphase; violations are detected and flagged, not repaired.
inline MomentIdentityReport verify_moment_identities(
    const PhasedGroverUnitary& u, const SpectralData* precomputed = nullptr) {
  SpectralData local;
  const SpectralData& sd =
      precomputed ? *precomputed : (local = eigendecompose(u), local);
  const RandVar& rv = u.rand_var();
  double mu = rv.mean();
  double s2 = rv.second_moment();

  MomentIdentityReport rep;
  CState tilde = normalized(ket_one_plus_iy(rv));
  ThetaDistribution td_tilde = theta_distribution(sd, tilde);
  rep.hav_expect = td_tilde.expectation([](double th) { return haversine(th); });
  rep.hav_closed = mu * mu / (1.0 + s2);
  rep.hav_deviation = std::abs(rep.hav_expect - rep.hav_closed);

  ThetaDistribution td_one = theta_distribution(sd, ket_one(rv.space_ptr()));
  double zero_mass = 0.0;
  for (std::size_t j = 0; j < td_one.size(); ++j)
    if (std::abs(td_one.thetas[j]) < kPhaseMergeTolerance)
      zero_mass += td_one.probs[j];
  if (mu == 0.0) {
    rep.reciprocal_skipped = true;
    rep.skip_reason = "mu = 0";
  } else if (zero_mass > 1e-12) {
    rep.reciprocal_skipped = true;
    rep.skip_reason = "weight on a zero eigenphase";
  } else {
    rep.inv_expect =
        td_one.expectation([](double th) { return 1.0 / haversine(th); });
    rep.inv_closed = (1.0 + s2) / (mu * mu);
    rep.inv_deviation = std::abs(rep.inv_expect - rep.inv_closed) /
                        std::max(1.0, rep.inv_closed);
  }
  return rep;
}

struct TailBoundReport {
  bool vacuous = false;          // mu = 0: the interval degenerates
  double outside_mass = 0.0;     // mass with |sin(theta/2)| outside the band
  double bound = 0.0;            // 2/C^2
  bool within = true;
  double window_mass_outside = 0.0;  // mass of |theta| outside [0.8,1.25]*2|mu|
  double window_bound = 2.0 / 9.0;
  bool window_applicable = false;    // requires s <= 1/16
  bool window_within = true;
};

// Exact eigenphase-tail checks: the |sin(theta/2)| band bound at parameter
// C (mass outside <= 2/C^2, valid when s <= 1/C) and the two-sided window
// instantiation (mass of |theta| outside [4/5, 5/4]*2|mu| at most 2/9 when
// s <= 1/16).
inline TailBoundReport tail_bound_check(const PhasedGroverUnitary& u, double c,
                                        const SpectralData* precomputed =
                                            nullptr) {
  if (c < 1.0) throw std::invalid_argument("C must be >= 1");
  const RandVar& rv = u.rand_var();
  double s = rv.second_moment_sqrt();
  if (s > 1.0 / c + 1e-15)
    throw std::invalid_argument("tail bound requires s <= 1/C");
  SpectralData local;
  const SpectralData& sd =
      precomputed ? *precomputed : (local = eigendecompose(u), local);

  TailBoundReport rep;
  rep.bound = 2.0 / (c * c);
  double mu = rv.mean();
  if (mu == 0.0) {
    rep.vacuous = true;
    return rep;
  }
  ThetaDistribution td = theta_distribution(sd, ket_one(rv.space_ptr()));
  double center = std::abs(mu) / std::sqrt(1.0 + s * s);
  double lo = center / (1.0 + c * s);
  double hi = center / (1.0 - c * s);
  KahanSum outside;
  for (std::size_t j = 0; j < td.size(); ++j) {
    double x = std::abs(std::sin(td.thetas[j] / 2.0));
    if (x < lo || x > hi) outside.add(td.probs[j]);
  }
  rep.outside_mass = outside.value();
  rep.within = rep.outside_mass <= rep.bound + 1e-12;

  if (s <= 1.0 / 16.0) {
    rep.window_applicable = true;
    double wlo = 0.8 * 2.0 * std::abs(mu);
    double whi = 1.25 * 2.0 * std::abs(mu);
    KahanSum wout;
    for (std::size_t j = 0; j < td.size(); ++j) {
      double a = std::abs(td.thetas[j]);
      if (a < wlo || a > whi) wout.add(td.probs[j]);
    }
    rep.window_mass_outside = wout.value();
    rep.window_within = rep.window_mass_outside <= rep.window_bound + 1e-12;
  }
  return rep;
}

struct BhattacharyyaReport {
  double coefficient = 0.0;  // sum_j sqrt(q_j r_j) over eigenindices
  double overlap = 0.0;      // |<s|t>|
  bool within = true;
};

inline BhattacharyyaReport bhattacharyya_bound_check(const SpectralData& sd,
                                                     const CState& s,
                                                     const CState& t) {
  if (std::abs(norm(s) - 1.0) > 1e-9 || std::abs(norm(t) - 1.0) > 1e-9)
    throw std::invalid_argument("bhattacharyya check needs unit states");
  KahanSum bc;
  for (std::size_t j = 0; j < sd.dim(); ++j) {
    double q = std::norm(inner(sd.eigenvectors[j], s));
    double r = std::norm(inner(sd.eigenvectors[j], t));
    bc.add(std::sqrt(q * r));
  }
  BhattacharyyaReport rep;
  rep.coefficient = bc.value();
  rep.overlap = std::abs(inner(s, t));
  rep.within = rep.coefficient >= rep.overlap - 1e-9;
  return rep;
}

// Second singular value of U + ROT_y in the orthonormal basis; the
// difference is a rank-one matrix, so this should vanish.
inline double rank_one_defect(const PhasedGroverUnitary& u) {
  Eigen::MatrixXcd m = orthonormal_matrix(u);
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    m(j, j) += u.phases()[static_cast<std::size_t>(j)];
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
  return m.cols() > 1 ? svd.singularValues()(1) : 0.0;
}

// --- rotating-line eigenvector construction ------------------------------

struct GeometricEigens {
  SpectralData spectral;
  std::vector<double> rotation_roots;  // phi* in [0, pi), ascending
  bool perturbed = false;              // duplicate values were nudged apart
  std::vector<double> values_used;     // post-perturbation values
};

namespace detail {

// p-weighted mean height of the rotated line intersections with Re = 1.
inline double mean_height(const RandVar& rv, const std::vector<double>& beta,
                          double phi) {
  KahanSum acc;
  for (std::size_t l = 0; l < rv.size(); ++l)
    acc.add(rv.weight(l) * std::tan(beta[l] - phi));
  return acc.value();
}

}  // namespace detail

// Finds all D eigenphases by rotating the family of lines through 1 + i*y_l
// and locating the rotation angles where the weighted barycenter of their
// Re = 1 intersections crosses the real axis. Between consecutive poles the
// barycenter height is strictly decreasing from +inf to -inf, so each
// inter-pole interval holds exactly one root; roots are found by bisection
// to 1e-12. A root phi* yields eigenphase -2*phi* (wrapped) and eigenvector
// coefficients 1 + i*tan(beta_l - phi*).
inline GeometricEigens geometric_eigens(const PhasedGroverUnitary& u) {
  const RandVar& rv = u.rand_var();
  const std::size_t n = rv.size();

  GeometricEigens out;
  std::vector<double> values(rv.values());
  {
    // Duplicate values collapse pole positions; nudge them apart by
    // distinct multiples of 1e-9 and report it.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return values[a] < values[b];
    });
    for (std::size_t k = 1; k < n; ++k) {
      std::size_t prev = order[k - 1], cur = order[k];
      if (values[cur] - values[prev] < 1e-11) {
        values[cur] = values[prev] + 1e-9 * (1.0 + 0.1 * static_cast<double>(k));
        out.perturbed = true;
      }
    }
  }
  out.values_used = values;

  std::vector<double> beta(n);
  for (std::size_t l = 0; l < n; ++l) beta[l] = std::atan(values[l]);

  RandVar work = out.perturbed ? RandVar(rv.space_ptr(), values) : rv;

  // Pole positions beta_l + pi/2 reduced mod pi into [0, pi).
  std::vector<double> poles(n);
  for (std::size_t l = 0; l < n; ++l) {
    double psi = std::fmod(beta[l] + kPi / 2.0, kPi);
    if (psi < 0.0) psi += kPi;
    poles[l] = psi;
  }
  std::sort(poles.begin(), poles.end());

  auto height = [&](double phi) { return detail::mean_height(work, beta, phi); };

  out.rotation_roots.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    double lo = poles[k];
    double hi = (k + 1 < n) ? poles[k + 1] : poles[0] + kPi;
    double pad = 1e-13 * std::max(1.0, std::abs(hi));
    double a = lo + pad, b = hi - pad;
    if (!(a < b)) throw EigensolverFailure("inter-pole interval collapsed");
    // height(a) > 0 > height(b); bisect on sign.
    for (int it = 0; it < 200 && b - a > 1e-12; ++it) {
      double mid = 0.5 * (a + b);
      if (height(mid) > 0.0)
        a = mid;
      else
        b = mid;
    }
    if (b - a > 1e-11)
      throw EigensolverFailure("barycenter root finding did not converge");
    double phi = 0.5 * (a + b);
    if (phi >= kPi) phi -= kPi;
    out.rotation_roots.push_back(phi);
  }
  std::sort(out.rotation_roots.begin(), out.rotation_roots.end());

  SpectralData sd;
  sd.eigenphases.reserve(n);
  sd.eigenvectors.reserve(n);
  std::vector<std::pair<double, std::size_t>> keyed(n);
  std::vector<CState> vecs;
  vecs.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    double phi = out.rotation_roots[k];
    double theta = wrap_angle(-2.0 * phi);
    std::vector<cplx> coeffs(n);
    for (std::size_t l = 0; l < n; ++l)
      coeffs[l] = cplx(1.0, std::tan(beta[l] - phi));
    CState v(rv.space_ptr(), std::move(coeffs));
    keyed[k] = {theta, k};
    vecs.push_back(normalized(v));
  }
  std::sort(keyed.begin(), keyed.end());
  for (auto& [theta, k] : keyed) {
    sd.eigenphases.push_back(theta);
    sd.eigenvectors.push_back(vecs[k]);
  }
  out.spectral = std::move(sd);
  return out;
}

// True when two phase multisets agree pairwise to `tol` as circle points.
inline bool eigenphases_match(const std::vector<double>& a,
                              const std::vector<double>& b, double tol) {
  if (a.size() != b.size()) return false;
  std::vector<double> x(a), y(b);
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  // Sorted direct match, retried with the smallest element rotated past pi
  // in case the multiset straddles the branch cut.
  for (int shift = 0; shift < 2; ++shift) {
    bool ok = true;
    for (std::size_t j = 0; j < x.size(); ++j)
      if (circular_distance(x[j], y[j]) > tol) {
        ok = false;
        break;
      }
    if (ok) return true;
    if (x.empty()) return false;
    x.front() += kTwoPi;
    std::sort(x.begin(), x.end());
  }
  return false;
}

}  // namespace qmean
