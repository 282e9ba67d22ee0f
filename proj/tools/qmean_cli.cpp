// Command-line surface for the simulation library: identity verification,
// estimator experiments, distinguisher runs and figure-data exports, all
// reproducible from (seed, trial) streams.

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "qmean/qmean.hpp"

namespace {

using namespace qmean;

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;

struct OutputTarget {
  std::unique_ptr<std::ofstream> file;
  std::ostream* stream = &std::cout;

  static OutputTarget open(const std::string& path) {
    OutputTarget t;
    if (!path.empty()) {
      t.file = std::make_unique<std::ofstream>(path, std::ios::binary);
      if (!*t.file) throw IoError("cannot open output file: " + path);
      t.stream = t.file.get();
    }
    return t;
  }
};

int cmd_verify(const std::string& instance_spec, std::uint64_t seed,
               const std::string& out_path) {
  std::optional<RandVar> extra;
  if (!instance_spec.empty()) extra = resolve_instance(instance_spec);
  auto checks = run_verification(seed, extra);
  OutputTarget out = OutputTarget::open(out_path);
  bool all_pass = true;
  for (const auto& c : checks) {
    std::string status = c.skipped ? "SKIP" : (c.pass ? "PASS" : "FAIL");
    *out.stream << status << "  " << c.name;
    if (!c.skipped && c.tolerance > 0.0)
      *out.stream << "  (deviation " << fmt_double(c.deviation)
                  << ", tolerance " << fmt_double(c.tolerance) << ")";
    if (!c.note.empty()) *out.stream << "  [" << c.note << "]";
    *out.stream << '\n';
    if (!c.pass) all_pass = false;
  }
  *out.stream << (all_pass ? "all checks passed\n" : "some checks FAILED\n");
  return all_pass ? kExitOk : kExitCheckFailed;
}

int cmd_estimate(const std::string& instance_spec, int n, int trials,
                 std::uint64_t seed, const std::string& out_path,
                 const std::string& format, int threads) {
  RandVar rv = resolve_instance(instance_spec);
  double mu = rv.mean();
  double sigma = rv.stddev();
  double band = sigma / static_cast<double>(n);

  struct Row {
    double mu_hat;
    std::uint64_t queries;
  };
  auto rows = run_trials<Row>(
      seed, trials,
      [&](int, Rng& rng, QueryLedger& ledger) -> Row {
        EstimateResult r = estimate_mean(rv, n, rng, ledger);
        return {r.mu_hat, r.queries_used};
      },
      threads);

  OutputTarget out = OutputTarget::open(out_path);
  int within = 0;
  if (format == "json") {
    nlohmann::json j;
    j["instance"] = instance_spec;
    j["n"] = n;
    j["mu"] = mu;
    j["sigma_over_n"] = band;
    nlohmann::json arr = nlohmann::json::array();
    for (int t = 0; t < trials; ++t) {
      double err = std::abs(rows[t].mu_hat - mu);
      bool ok = err <= band;
      within += ok ? 1 : 0;
      arr.push_back({{"trial", t},
                     {"mu_hat", rows[t].mu_hat},
                     {"abs_error", err},
                     {"within", ok},
                     {"queries", rows[t].queries}});
    }
    j["rows"] = arr;
    j["success_fraction"] = static_cast<double>(within) / trials;
    *out.stream << j.dump(2) << '\n';
  } else {
    CsvWriter csv(*out.stream);
    csv.header({"trial", "mu_hat", "abs_error", "sigma_over_n", "within",
                "queries"});
    for (int t = 0; t < trials; ++t) {
      double err = std::abs(rows[t].mu_hat - mu);
      bool ok = err <= band;
      within += ok ? 1 : 0;
      csv.row_strings({std::to_string(t), fmt_double(rows[t].mu_hat),
                       fmt_double(err), fmt_double(band), ok ? "1" : "0",
                       std::to_string(rows[t].queries)});
    }
  }
  std::cout << "success fraction: "
            << fmt_double(static_cast<double>(within) / trials) << '\n';
  return kExitOk;
}

int cmd_maintask(const std::string& instance_spec, double eps,
                 const std::string& mode, int trials, std::uint64_t seed,
                 const std::string& out_path, const std::string& format,
                 int threads) {
  RandVar rv = resolve_instance(instance_spec);
  double mu = std::abs(rv.mean());
  std::string truth = mu <= eps / 2.0 ? "small"
                      : (mu >= eps ? "large" : "gap");

  auto rows = run_trials<MainTaskVerdict>(
      seed, trials,
      [&](int, Rng& rng, QueryLedger& ledger) {
        if (mode == "elementary")
          return main_task_elementary(rv, eps, rng, ledger);
        if (mode == "eleven")
          return main_task_eleven_intervals(rv, eps, rng, ledger);
        return main_task_qpe(rv, eps, rng, ledger);
      },
      threads);

  OutputTarget out = OutputTarget::open(out_path);
  int correct = 0;
  if (format == "json") {
    nlohmann::json arr = nlohmann::json::array();
    for (int t = 0; t < trials; ++t) {
      nlohmann::json j = verdict_to_json(rows[t]);
      j["trial"] = t;
      std::string got =
          rows[t].verdict == Verdict::kSmall ? "small" : "large";
      bool ok = truth == "gap" || got == truth;
      j["correct"] = ok;
      correct += ok ? 1 : 0;
      arr.push_back(j);
    }
    nlohmann::json top;
    top["truth"] = truth;
    top["rows"] = arr;
    top["success_fraction"] = static_cast<double>(correct) / trials;
    *out.stream << top.dump(2) << '\n';
  } else {
    CsvWriter csv(*out.stream);
    csv.header({"trial", "verdict", "theta_prime", "votes_plus",
                "votes_total", "queries", "correct"});
    for (int t = 0; t < trials; ++t) {
      std::string got =
          rows[t].verdict == Verdict::kSmall ? "small" : "large";
      bool ok = truth == "gap" || got == truth;
      correct += ok ? 1 : 0;
      csv.row_strings(
          {std::to_string(t), got,
           rows[t].theta_prime ? fmt_double(*rows[t].theta_prime) : "",
           std::to_string(rows[t].votes_plus),
           std::to_string(rows[t].votes_total),
           std::to_string(rows[t].queries_used), ok ? "1" : "0"});
    }
  }
  std::cout << "promise case: " << truth << ", success fraction: "
            << fmt_double(static_cast<double>(correct) / trials) << '\n';
  return kExitOk;
}

int cmd_quantile(const std::string& instance_spec, int n,
                 const std::string& mode, int trials, std::uint64_t seed,
                 const std::string& out_path, int threads) {
  RandVar rv = abs_value(resolve_instance(instance_spec));
  QuantileMode qm =
      mode == "oracle" ? QuantileMode::kOracle : QuantileMode::kSimulated;

  struct Row {
    double cap;
    std::uint64_t queries;
  };
  auto rows = run_trials<Row>(
      seed, trials,
      [&](int, Rng& rng, QueryLedger& ledger) -> Row {
        double b = estimate_quantile(rv, n, rng, ledger, qm);
        return {b, ledger.count()};
      },
      threads);

  double inv = 1.0 / (static_cast<double>(n) * n);
  OutputTarget out = OutputTarget::open(out_path);
  CsvWriter csv(*out.stream);
  csv.header({"trial", "cap", "tail_ge", "tail_gt", "conditions_hold",
              "queries"});
  int ok_count = 0;
  for (int t = 0; t < trials; ++t) {
    double ge = 0.0, gt = 0.0;
    for (std::size_t l = 0; l < rv.size(); ++l) {
      if (rv.value(l) >= rows[t].cap) ge += rv.weight(l);
      if (rv.value(l) > rows[t].cap) gt += rv.weight(l);
    }
    bool ok = ge >= inv && gt <= kQuantileTailSlack * inv;
    ok_count += ok ? 1 : 0;
    csv.row_strings({std::to_string(t), fmt_double(rows[t].cap),
                     fmt_double(ge), fmt_double(gt), ok ? "1" : "0",
                     std::to_string(rows[t].queries)});
  }
  std::cout << "conditions held on " << ok_count << "/" << trials
            << " runs\n";
  return kExitOk;
}

DistPair resolve_pair(const std::string& spec) {
  if (spec.rfind("flip-", 0) == 0) {
    double h = std::stod(spec.substr(5));
    if (!(h > 0.0 && h < 1.4))
      throw IoError("flip pair needs a distance in (0, 1.4)");
    double c = 1.0 - h * h / 2.0;
    double d = std::sqrt(0.25 - c * c / 4.0);
    return DistPair({0.5 + d, 0.5 - d}, {0.5 - d, 0.5 + d});
  }
  std::ifstream in(spec);
  if (!in) throw IoError("cannot open pair file: " + spec);
  nlohmann::json j;
  try {
    in >> j;
    return DistPair(j.at("q").get<std::vector<double>>(),
                    j.at("r").get<std::vector<double>>());
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed pair JSON: ") + e.what());
  }
}

int cmd_distinguish(const std::string& pair_spec, const std::string& truth,
                    int trials, std::uint64_t seed,
                    const std::string& out_path, int threads) {
  DistPair pair = resolve_pair(pair_spec);
  PairSide side = truth == "r" ? PairSide::kR : PairSide::kQ;

  struct Row {
    bool correct;
    std::uint64_t queries;
  };
  auto rows = run_trials<Row>(
      seed, trials,
      [&](int, Rng& rng, QueryLedger& ledger) -> Row {
        PairSide got = distinguish_distributions(pair, side, rng, ledger);
        return {got == side, ledger.count()};
      },
      threads);

  OutputTarget out = OutputTarget::open(out_path);
  CsvWriter csv(*out.stream);
  csv.header({"trial", "hellinger", "correct", "queries"});
  int correct = 0;
  for (int t = 0; t < trials; ++t) {
    correct += rows[t].correct ? 1 : 0;
    csv.row_strings({std::to_string(t), fmt_double(pair.hellinger()),
                     rows[t].correct ? "1" : "0",
                     std::to_string(rows[t].queries)});
  }
  std::cout << "success fraction: "
            << fmt_double(static_cast<double>(correct) / trials) << '\n';
  return kExitOk;
}

int cmd_grover(std::uint64_t n_items, int marked, int trials,
               std::uint64_t seed, const std::string& out_path, int threads) {
  struct Row {
    bool correct;
    std::uint64_t queries;
  };
  auto rows = run_trials<Row>(
      seed, trials,
      [&](int, Rng& rng, QueryLedger& ledger) -> Row {
        GroverVerdict got = grover_demo(n_items, marked == 1, rng, ledger);
        bool ok = (got == GroverVerdict::kOne) == (marked == 1);
        return {ok, ledger.count()};
      },
      threads);

  OutputTarget out = OutputTarget::open(out_path);
  CsvWriter csv(*out.stream);
  csv.header({"trial", "n_items", "marked", "correct", "queries"});
  int correct = 0;
  for (int t = 0; t < trials; ++t) {
    correct += rows[t].correct ? 1 : 0;
    csv.row_strings({std::to_string(t), std::to_string(n_items),
                     std::to_string(marked), rows[t].correct ? "1" : "0",
                     std::to_string(rows[t].queries)});
  }
  std::cout << "success fraction: "
            << fmt_double(static_cast<double>(correct) / trials) << '\n';
  return kExitOk;
}

int cmd_figures(const std::string& instance_spec, int steps,
                const std::string& out_prefix) {
  RandVar rv = resolve_instance(instance_spec);
  PhasedGroverUnitary u(rv);
  GeometricEigens geo = geometric_eigens(u);

  auto open = [&](const std::string& suffix) {
    std::string path = out_prefix + suffix;
    auto f = std::make_unique<std::ofstream>(path, std::ios::binary);
    if (!*f) throw IoError("cannot open output file: " + path);
    return f;
  };
  auto traj = open(".trajectory.csv");
  write_trajectory_csv(*traj, u, static_cast<std::uint64_t>(steps));
  auto scan = open(".eigenscan.csv");
  write_eigenscan_csv(*scan, u, geo, 720);
  auto roots = open(".roots.csv");
  write_roots_csv(*roots, geo);
  std::cout << "wrote " << out_prefix
            << ".{trajectory,eigenscan,roots}.csv\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"simulator for phased-search mean estimation"};
  app.require_subcommand(1);

  std::uint64_t seed = 1;
  int trials = 100;
  int threads = 0;
  std::string instance_spec, out_path, format = "csv";

  auto add_common = [&](CLI::App* sub, bool with_format = true) {
    sub->add_option("--seed", seed, "base seed; trial k uses stream (seed,k)");
    sub->add_option("--trials", trials, "number of independent trials");
    sub->add_option("--out", out_path, "output file (default: stdout)");
    sub->add_option("--threads", threads,
                    "worker threads (0 = hardware default)");
    if (with_format)
      sub->add_option("--format", format, "output format")
          ->check(CLI::IsMember({"csv", "json"}));
  };

  auto* verify = app.add_subcommand("verify", "run the identity/bound suite");
  verify->add_option("--instance", instance_spec,
                     "extra instance (name or JSON file)");
  verify->add_option("--seed", seed, "seed for the randomized checks");
  verify->add_option("--out", out_path, "output file (default: stdout)");

  int n = 32;
  auto* estimate =
      app.add_subcommand("estimate", "mean estimation experiment");
  estimate->add_option("--instance", instance_spec)->required();
  estimate->add_option("--n", n, "accuracy parameter: error target sigma/n");
  add_common(estimate);

  double eps = 0.01;
  std::string mode = "qpe";
  auto* maintask = app.add_subcommand("maintask", "distinguisher experiment");
  maintask->add_option("--instance", instance_spec)->required();
  maintask->add_option("--eps", eps, "promise gap parameter")->required();
  maintask->add_option("--mode", mode, "distinguisher route")
      ->check(CLI::IsMember({"qpe", "elementary", "eleven"}));
  add_common(maintask);

  std::string qmode = "simulated";
  auto* quantile = app.add_subcommand("quantile", "tail cap experiment");
  quantile->add_option("--instance", instance_spec)->required();
  quantile->add_option("--n", n, "tail scale: cap targets mass 1/n^2");
  quantile->add_option("--mode", qmode, "search mode")
      ->check(CLI::IsMember({"simulated", "oracle"}));
  add_common(quantile, false);

  std::string pair_spec, truth = "q";
  auto* distinguish =
      app.add_subcommand("distinguish", "distribution distinguishing");
  distinguish
      ->add_option("--pair", pair_spec,
                   "pair spec: flip-<H> or JSON file with q and r")
      ->required();
  distinguish->add_option("--truth", truth, "which side generates samples")
      ->check(CLI::IsMember({"q", "r"}));
  add_common(distinguish, false);

  std::uint64_t n_items = 64;
  int marked = 1;
  auto* grover = app.add_subcommand("grover", "marked-item search demo");
  grover->add_option("--n-items", n_items, "search space size");
  grover->add_option("--marked", marked, "0 or 1 marked items")
      ->check(CLI::IsMember({0, 1}));
  add_common(grover, false);

  int steps = 8;
  auto* figures =
      app.add_subcommand("figures", "trajectory and eigenscan CSV export");
  figures->add_option("--instance", instance_spec)->required();
  figures->add_option("--steps", steps, "number of applications to record");
  figures->add_option("--out", out_path, "output path prefix")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (verify->parsed()) return cmd_verify(instance_spec, seed, out_path);
    if (estimate->parsed()) {
      if (n < kMinEstimationN) throw IoError("estimate needs --n >= 4");
      return cmd_estimate(instance_spec, n, trials, seed, out_path, format,
                          threads);
    }
    if (maintask->parsed())
      return cmd_maintask(instance_spec, eps, mode, trials, seed, out_path,
                          format, threads);
    if (quantile->parsed())
      return cmd_quantile(instance_spec, n, qmode, trials, seed, out_path,
                          threads);
    if (distinguish->parsed())
      return cmd_distinguish(pair_spec, truth, trials, seed, out_path,
                             threads);
    if (grover->parsed())
      return cmd_grover(n_items, marked, trials, seed, out_path, threads);
    if (figures->parsed())
      return cmd_figures(instance_spec, steps, out_path);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitCheckFailed;
  }
  return kExitUsage;
}
