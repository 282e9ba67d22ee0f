#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "qmean/apps.hpp"
#include "qmean/estimate.hpp"
#include "qmean/instances.hpp"
#include "qmean/spectral.hpp"

namespace qmean {

struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// Shortest round-trip decimal rendering; locale-free, so outputs are
// byte-identical across runs and machines.
inline std::string fmt_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

// --- instance JSON: {"weights": [...], "values": [...]} -------------------

inline RandVar rand_var_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("weights") || !j.contains("values"))
    throw IoError("instance JSON needs \"weights\" and \"values\" arrays");
  try {
    std::vector<double> w = j.at("weights").get<std::vector<double>>();
    std::vector<double> v = j.at("values").get<std::vector<double>>();
    return make_rand_var(w, v);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed instance JSON: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw IoError(std::string("invalid instance: ") + e.what());
  }
}

inline nlohmann::json rand_var_to_json(const RandVar& rv) {
  nlohmann::json j;
  j["weights"] = rv.space().weights();
  j["values"] = rv.values();
  return j;
}

inline RandVar load_instance_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open instance file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed JSON in ") + path + ": " + e.what());
  }
  return rand_var_from_json(j);
}

// Named built-in instances: fig-aa, fig-eigs, heavy-tail, grover-<N>,
// bernoulli-<p>, constant-<c>; anything else is read as a file path.
inline RandVar resolve_instance(const std::string& name) {
  if (name == "fig-aa") return fig_aa();
  if (name == "fig-eigs") return fig_eigs();
  if (name == "heavy-tail") return heavy_tail();
  auto starts = [&](const std::string& prefix) {
    return name.rfind(prefix, 0) == 0;
  };
  auto parse_suffix = [&](std::size_t at) {
    std::string tail = name.substr(at);
    try {
      std::size_t used = 0;
      double v = std::stod(tail, &used);
      if (used != tail.size()) throw IoError("bad suffix: " + name);
      return v;
    } catch (const std::exception&) {
      throw IoError("cannot parse parameter in instance name: " + name);
    }
  };
  if (starts("grover-")) {
    double n = parse_suffix(7);
    if (n < 4 || n != std::floor(n))
      throw IoError("grover instance needs an integer N >= 4");
    return grover_instance(static_cast<std::uint64_t>(n), true);
  }
  if (starts("bernoulli-")) return bernoulli_instance(parse_suffix(10));
  if (starts("constant-")) return make_rand_var({1.0}, {parse_suffix(9)});
  return load_instance_file(name);
}

// --- CSV ------------------------------------------------------------------

class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}

  void header(const std::vector<std::string>& names) { row_strings(names); }

  void row_strings(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << cells[i];
    }
    out_ << '\n';
  }

 private:
  std::ostream& out_;
};

inline void write_rand_var_csv(std::ostream& out, const RandVar& rv) {
  CsvWriter csv(out);
  csv.header({"outcome", "p", "y"});
  for (std::size_t l = 0; l < rv.size(); ++l)
    csv.row_strings({std::to_string(l + 1), fmt_double(rv.weight(l)),
                     fmt_double(rv.value(l))});
}

// Trajectory of U^t applied to the all-ones state: one row per (step,
// outcome) with the coefficient and the running barycenter.
inline void write_trajectory_csv(std::ostream& out,
                                 const PhasedGroverUnitary& u,
                                 std::uint64_t steps) {
  CsvWriter csv(out);
  csv.header({"t", "outcome", "re_z", "im_z", "re_barycenter",
              "im_barycenter"});
  CState s = ket_one(u.space_ptr());
  for (std::uint64_t t = 0; t <= steps; ++t) {
    cplx bary = expectation(s);
    for (std::size_t l = 0; l < s.size(); ++l)
      csv.row_strings({std::to_string(t), std::to_string(l + 1),
                       fmt_double(s.coeff(l).real()),
                       fmt_double(s.coeff(l).imag()), fmt_double(bary.real()),
                       fmt_double(bary.imag())});
    if (t < steps) s = u.apply_raw(s);
  }
}

inline void write_theta_csv(std::ostream& out, const ThetaDistribution& td) {
  CsvWriter csv(out);
  csv.header({"theta", "q"});
  for (std::size_t j = 0; j < td.size(); ++j)
    csv.row_strings({fmt_double(td.thetas[j]), fmt_double(td.probs[j])});
}

// Mean intersection height of the rotating-line construction sampled on a
// phi grid, plus the located roots.
inline void write_eigenscan_csv(std::ostream& out,
                                const PhasedGroverUnitary& u,
                                const GeometricEigens& geo, int grid_points) {
  CsvWriter csv(out);
  csv.header({"phi", "mean_height"});
  const RandVar& rv = u.rand_var();
  std::vector<double> beta(rv.size());
  for (std::size_t l = 0; l < rv.size(); ++l)
    beta[l] = std::atan(geo.values_used[l]);
  for (int i = 0; i < grid_points; ++i) {
    double phi = kPi * (i + 0.5) / grid_points;
    KahanSum acc;
    for (std::size_t l = 0; l < rv.size(); ++l)
      acc.add(rv.weight(l) * std::tan(beta[l] - phi));
    csv.row_strings({fmt_double(phi), fmt_double(acc.value())});
  }
}

inline void write_roots_csv(std::ostream& out, const GeometricEigens& geo) {
  CsvWriter csv(out);
  csv.header({"phi_root", "eigenphase"});
  for (double phi : geo.rotation_roots)
    csv.row_strings({fmt_double(phi), fmt_double(wrap_angle(-2.0 * phi))});
}

// --- results --------------------------------------------------------------

inline nlohmann::json estimate_result_to_json(const EstimateResult& r) {
  nlohmann::json j;
  j["mu_hat"] = r.mu_hat;
  j["queries"] = r.queries_used;
  nlohmann::json trace = nlohmann::json::array();
  for (const auto& rec : r.trace) {
    trace.push_back({{"stage", rec.stage},
                     {"eta", rec.eta},
                     {"delta", rec.delta},
                     {"value", rec.value},
                     {"note", rec.note}});
  }
  j["trace"] = trace;
  return j;
}

inline nlohmann::json verdict_to_json(const MainTaskVerdict& v) {
  nlohmann::json j;
  j["verdict"] = v.verdict == Verdict::kSmall ? "small" : "large";
  j["queries"] = v.queries_used;
  if (v.theta_prime) j["theta_prime"] = *v.theta_prime;
  if (v.votes_total > 0) {
    j["votes_plus"] = v.votes_plus;
    j["votes_total"] = v.votes_total;
  }
  return j;
}

}  // namespace qmean
