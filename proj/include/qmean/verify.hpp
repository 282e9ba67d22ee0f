#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qmean/instances.hpp"
#include "qmean/spectral.hpp"

namespace qmean {

struct VerifyCheck {
  std::string name;
  bool pass = false;
  bool skipped = false;
  double deviation = 0.0;
  double tolerance = 0.0;
  std::string note;
};

namespace detail {

inline void check_instance(const std::string& label, const RandVar& rv,
                           Rng& rng, std::vector<VerifyCheck>& out) {
  PhasedGroverUnitary u(rv);
  SpectralData sd = eigendecompose(u);
  const double mu = rv.mean();
  const double s2 = rv.second_moment();

  {
    VerifyCheck c{label + ": weighted inner products", false, false, 0.0,
                  1e-12, ""};
    CState one = ket_one(rv.space_ptr());
    CState oiy = ket_one_plus_iy(rv);
    double d1 = std::abs(inner(oiy, oiy) - cplx(1.0 + s2, 0.0));
    double d2 = std::abs(inner(one, oiy) - cplx(1.0, mu));
    c.deviation = std::max(d1, d2);
    c.pass = c.deviation <= c.tolerance;
    out.push_back(c);
  }
  {
    VerifyCheck c{label + ": defect identity", false, false, 0.0, 1e-10, ""};
    CState in = ket_one_plus_iy(rv);
    CState img = u.apply_raw(in);
    double worst = 0.0;
    for (std::size_t l = 0; l < rv.size(); ++l) {
      cplx defect = (in.coeff(l) - img.coeff(l)) / 2.0;
      worst = std::max(worst, std::abs(defect - cplx(0.0, mu)));
    }
    c.deviation = worst;
    c.pass = worst <= c.tolerance;
    out.push_back(c);
  }
  {
    VerifyCheck c{label + ": weighted unitarity", false, false, 0.0, 1e-9,
                  ""};
    std::vector<cplx> a(rv.size()), b(rv.size());
    for (std::size_t l = 0; l < rv.size(); ++l) {
      a[l] = cplx(rng.uniform01() - 0.5, rng.uniform01() - 0.5);
      b[l] = cplx(rng.uniform01() - 0.5, rng.uniform01() - 0.5);
    }
    CState w(rv.space_ptr(), std::move(a));
    CState z(rv.space_ptr(), std::move(b));
    cplx before = inner(w, z);
    cplx after = inner(u.apply_raw(w), u.apply_raw(z));
    c.deviation = std::abs(after - before);
    c.pass = c.deviation <= c.tolerance;
    out.push_back(c);
  }
  {
    MomentIdentityReport rep = verify_moment_identities(u, &sd);
    VerifyCheck c1{label + ": haversine moment identity", false, false,
                   rep.hav_deviation, 1e-8, ""};
    c1.pass = rep.hav_deviation <= c1.tolerance;
    out.push_back(c1);
    VerifyCheck c2{label + ": reciprocal haversine identity", false, false,
                   rep.inv_deviation, 1e-8, ""};
    if (rep.reciprocal_skipped) {
      c2.skipped = true;
      c2.pass = true;
      c2.note = "skipped: " + rep.skip_reason;
    } else {
      c2.pass = rep.inv_deviation <= c2.tolerance;
    }
    out.push_back(c2);
  }
  {
    VerifyCheck c{label + ": eigenphase tail bound", false, false, 0.0, 0.0,
                  ""};
    double s = rv.second_moment_sqrt();
    std::optional<double> usable;
    for (double cc : {8.0, 3.0, 2.0})
      if (s <= 1.0 / cc) {
        usable = cc;
        break;
      }
    if (!usable || mu == 0.0) {
      c.skipped = true;
      c.pass = true;
      c.note = mu == 0.0 ? "skipped: mu = 0" : "skipped: s too large";
    } else {
      TailBoundReport rep = tail_bound_check(u, *usable, &sd);
      c.deviation = rep.outside_mass;
      c.tolerance = rep.bound;
      c.pass = rep.within && (!rep.window_applicable || rep.window_within);
    }
    out.push_back(c);
  }
  {
    VerifyCheck c{label + ": geometric eigenphase agreement", false, false,
                  0.0, 1e-6, ""};
    GeometricEigens geo = geometric_eigens(u);
    c.pass = eigenphases_match(geo.spectral.eigenphases, sd.eigenphases,
                               c.tolerance);
    if (geo.perturbed) c.note = "duplicate values perturbed";
    out.push_back(c);
  }
  {
    VerifyCheck c{label + ": rank-one structure", false, false, 0.0, 1e-9,
                  ""};
    c.deviation = rank_one_defect(u);
    c.pass = c.deviation <= c.tolerance;
    out.push_back(c);
  }
}

}  // namespace detail

// Runs the identity/bound suite over the built-in instances, a fixed batch
// of random instances, and (optionally) a user-supplied one.
inline std::vector<VerifyCheck> run_verification(
    std::uint64_t seed, const std::optional<RandVar>& extra = std::nullopt) {
  std::vector<VerifyCheck> out;
  Rng rng(seed);
  detail::check_instance("fig-aa", fig_aa(), rng, out);
  detail::check_instance("fig-eigs", fig_eigs(), rng, out);
  detail::check_instance("zero-values",
                         make_rand_var(std::vector<double>(8, 0.125),
                                       std::vector<double>(8, 0.0)),
                         rng, out);
  detail::check_instance("scalar", make_rand_var({1.0}, {0.42}), rng, out);
  for (int i = 0; i < 5; ++i) {
    RandVar rv = random_instance(rng, 2 + rng.below(31),
                                 0.05 + 0.9 * rng.uniform01());
    detail::check_instance("random-" + std::to_string(i), rv, rng, out);
  }
  if (extra) detail::check_instance("user", *extra, rng, out);
  return out;
}

}  // namespace qmean
