#include "sdm/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "sdm/config.hpp"
#include "sdm/loop.hpp"
#include "sdm/verify.hpp"

namespace sdm::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

void write_file_atomic(const fs::path& path, const std::string& body) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open for writing: " + tmp.string());
    f.write(body.data(), static_cast<std::streamsize>(body.size()));
    if (!f) throw std::runtime_error("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_time(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

std::string fingerprint_hex(std::uint64_t fp) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fp));
  return buf;
}

json counters_to_json(const OpCounters& c) {
  json j;
  j["dot_products"] = c.dot_products;
  j["contraction_madds"] = c.contraction_madds;
  j["vector_madds"] = c.vector_madds;
  j["comparisons"] = c.comparisons;
  return j;
}

struct SimResult {
  RunConfig cfg;
  std::uint64_t fingerprint = 0;
  std::vector<RoundMetrics> rounds;
  double final_accuracy = 0.0;
  std::vector<int> selected_round_flags;
};

SimResult run_simulation(RunConfig cfg) {
  DomainDataset dataset = make_dataset(cfg.dataset, cfg.experiment.seed);
  SimResult res;
  res.fingerprint = dataset.fingerprint();
  LoopResult loop = active_learning_loop(cfg.experiment, dataset);
  res.cfg = std::move(cfg);
  res.rounds = std::move(loop.rounds);
  res.final_accuracy = res.rounds.back().target_test_accuracy;
  res.selected_round_flags.assign(dataset.target_pool_size(), -1);
  for (const RoundMetrics& rm : res.rounds) {
    for (int idx : rm.selected_indices) {
      res.selected_round_flags[idx] = rm.round_index;
    }
  }
  return res;
}

std::string rounds_csv(const std::vector<RoundMetrics>& rounds, bool with_timings) {
  std::string out = "round,labeled_count,accuracy,query_time_s,op_count\n";
  for (const RoundMetrics& r : rounds) {
    out += std::to_string(r.round_index) + ',' +
           std::to_string(r.labeled_target_count) + ',' +
           fmt(r.target_test_accuracy) + ',' +
           fmt_time(with_timings ? r.query_wall_time_s : 0.0) + ',' +
           std::to_string(r.op_counters.total_madds()) + '\n';
  }
  return out;
}

// Manifest carries everything deterministic about the run; wall times stay
// in rounds.csv only.
json manifest_json(const SimResult& res) {
  json doc;
  doc["tool_version"] = kToolVersion;
  doc["config"] = run_config_to_json(res.cfg);
  doc["dataset_fingerprint"] = fingerprint_hex(res.fingerprint);
  json rounds = json::array();
  for (const RoundMetrics& r : res.rounds) {
    json jr;
    jr["round"] = r.round_index;
    jr["labeled_count"] = r.labeled_target_count;
    jr["accuracy"] = r.target_test_accuracy;
    if (r.source_margin_fraction >= 0.0) {
      jr["source_margin_fraction"] = r.source_margin_fraction;
    } else {
      jr["source_margin_fraction"] = nullptr;
    }
    jr["op_counters"] = counters_to_json(r.op_counters);
    jr["selected_indices"] = r.selected_indices;
    rounds.push_back(std::move(jr));
  }
  doc["rounds"] = std::move(rounds);
  json final_summary;
  final_summary["accuracy"] = res.final_accuracy;
  final_summary["labeled_count"] = res.rounds.back().labeled_target_count;
  doc["final"] = std::move(final_summary);
  return doc;
}

int config_failure(const std::exception& e) {
  std::cerr << e.what() << "\n";
  return kExitConfigError;
}

}  // namespace

int cmd_simulate(const std::string& config_path, const std::string& out_dir,
                 std::optional<std::uint64_t> seed_override, bool with_timings) {
  RunConfig cfg;
  try {
    cfg = load_run_config(config_path);
  } catch (const std::invalid_argument& e) {
    return config_failure(e);
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kExitRuntimeError;
  }
  if (seed_override) cfg.experiment.seed = *seed_override;
  try {
    const SimResult res = run_simulation(std::move(cfg));
    fs::create_directories(out_dir);
    write_file_atomic(fs::path(out_dir) / "rounds.csv",
                      rounds_csv(res.rounds, with_timings));
    write_file_atomic(fs::path(out_dir) / "manifest.json",
                      manifest_json(res).dump(2) + "\n");
    std::cout << "final accuracy " << fmt(res.final_accuracy) << " after "
              << res.rounds.back().labeled_target_count << " annotations\n";
    return kExitOk;
  } catch (const std::invalid_argument& e) {
    return config_failure(e);
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kExitRuntimeError;
  }
}

int cmd_compare(const std::string& config_path,
                const std::vector<std::string>& strategies, int seeds,
                const std::string& out_dir,
                std::optional<std::uint64_t> seed_override) {
  if (strategies.empty()) {
    std::cerr << "compare: need at least one strategy\n";
    return kExitConfigError;
  }
  if (seeds < 1) {
    std::cerr << "compare: need at least one seed\n";
    return kExitConfigError;
  }
  RunConfig base;
  std::vector<Strategy> parsed;
  try {
    base = load_run_config(config_path);
    for (const std::string& name : strategies) parsed.push_back(strategy_from_name(name));
  } catch (const std::invalid_argument& e) {
    return config_failure(e);
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kExitRuntimeError;
  }
  if (seed_override) base.experiment.seed = *seed_override;

  try {
    const std::uint64_t base_seed = base.experiment.seed;
    std::string csv = "strategy,seeds,mean_final_accuracy,std_final_accuracy\n";
    std::string md =
        "| strategy | seeds | final accuracy (mean +/- std) |\n"
        "|---|---|---|\n";
    for (std::size_t si = 0; si < parsed.size(); ++si) {
      std::vector<double> finals;
      for (int i = 0; i < seeds; ++i) {
        RunConfig cfg = base;
        cfg.experiment.strategy = parsed[si];
        cfg.experiment.seed = base_seed + static_cast<std::uint64_t>(i);
        finals.push_back(run_simulation(std::move(cfg)).final_accuracy);
      }
      const double mean =
          std::accumulate(finals.begin(), finals.end(), 0.0) / finals.size();
      double var = 0.0;
      for (double v : finals) var += (v - mean) * (v - mean);
      const double stddev =
          finals.size() > 1 ? std::sqrt(var / (finals.size() - 1)) : 0.0;
      csv += strategies[si] + ',' + std::to_string(seeds) + ',' + fmt(mean) + ',' +
             fmt(stddev) + '\n';
      char row[160];
      std::snprintf(row, sizeof(row), "| %s | %d | %.4f +/- %.4f |\n",
                    strategies[si].c_str(), seeds, mean, stddev);
      md += row;
    }
    fs::create_directories(out_dir);
    write_file_atomic(fs::path(out_dir) / "compare.csv", csv);
    write_file_atomic(fs::path(out_dir) / "compare.md", md);
    std::cout << md;
    return kExitOk;
  } catch (const std::invalid_argument& e) {
    return config_failure(e);
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kExitRuntimeError;
  }
}

int cmd_verify(int trials, std::uint64_t seed, const std::string& out_dir,
               std::optional<double> eta_override) {
  if (trials < 1) {
    std::cerr << "verify: trials must be >= 1\n";
    return kExitConfigError;
  }
  VerifyOptions options;
  options.trials = trials;
  options.seed = seed;
  if (eta_override) {
    if (!(*eta_override > 0.0)) {
      std::cerr << "verify: learning rate must be positive (got "
                << *eta_override << "); refusing to run\n";
      return kExitConfigError;
    }
    options.eta = *eta_override;
  }

  try {
    const VerifyReport report = run_verify(options);
    json doc;
    doc["tool_version"] = kToolVersion;
    doc["trials"] = report.options.trials;
    doc["seed"] = report.options.seed;
    doc["eta"] = report.options.eta;
    doc["m"] = report.options.m;
    json prop1;
    prop1["trials"] = report.prop1.trials;
    prop1["max_closed_form_error"] = report.prop1.max_closed_form_error;
    prop1["monotonicity_violations"] = report.prop1.monotonicity_violations;
    prop1["derivative_sign_violations"] = report.prop1.derivative_sign_violations;
    doc["prop1"] = prop1;
    json checks = json::array();
    for (const GradientCheck& c : report.gradient_checks) {
      json jc;
      jc["name"] = c.name;
      jc["instances"] = c.instances;
      jc["max_rel_error"] = c.max_rel_error;
      jc["tolerance"] = c.tolerance;
      jc["failures"] = c.failures;
      jc["pass"] = c.pass();
      checks.push_back(std::move(jc));
    }
    doc["gradient_checks"] = std::move(checks);
    json ident;
    ident["instances"] = report.loss_identity.instances;
    ident["max_abs_error"] = report.loss_identity.max_abs_error;
    ident["tolerance"] = report.loss_identity.tolerance;
    ident["failures"] = report.loss_identity.failures;
    ident["pass"] = report.loss_identity.pass();
    doc["loss_identity"] = std::move(ident);
    doc["all_pass"] = report.all_pass();

    fs::create_directories(out_dir);
    write_file_atomic(fs::path(out_dir) / "verify.json", doc.dump(2) + "\n");
    std::cout << (report.all_pass() ? "verify: all checks passed\n"
                                    : "verify: VIOLATIONS found, see verify.json\n");
    return report.all_pass() ? kExitOk : kExitVerifyFailed;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kExitRuntimeError;
  }
}

namespace {

struct BenchRow {
  int n = 0;
  OpCounters counters;
  double wall_s = 0.0;
};

BenchRow bench_once(int n, int k, int d, Strategy strategy, std::uint64_t seed) {
  Rng rng(seed);
  LinearClassifier clf(k, d);
  for (double& w : clf.weights) w = 0.3 * rng.next_normal();
  std::vector<FeatureVector> features(n);
  for (FeatureVector& f : features) {
    f.resize(d);
    for (double& v : f) v = rng.next_normal();
  }
  UnlabeledPool pool;
  pool.indices.resize(n);
  std::iota(pool.indices.begin(), pool.indices.end(), 0);
  pool.features.reserve(n);
  for (const FeatureVector& f : features) pool.features.push_back(&f);

  QueryConfig qcfg;
  qcfg.strategy = strategy;
  qcfg.seed = seed;
  const int b = std::max(1, n / 100);

  BenchRow row;
  row.n = n;
  double best = -1.0;
  for (int rep = 0; rep < 3; ++rep) {
    OpCounters counters;
    const auto t0 = std::chrono::steady_clock::now();
    const std::vector<QueryScore> scores = score_pool(pool, clf, qcfg, counters);
    const std::vector<int> selected = select_top_b(scores, b, &counters);
    const auto t1 = std::chrono::steady_clock::now();
    const double wall = std::chrono::duration<double>(t1 - t0).count();
    if (best < 0.0 || wall < best) {
      best = wall;
      row.counters = counters;
    }
  }
  row.wall_s = best;
  return row;
}

struct ScalingFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

// Least squares of y against x = N*K*D + N*log2(N).
ScalingFit fit_scaling(const std::vector<BenchRow>& rows, int k, int d) {
  ScalingFit fit;
  const std::size_t n = rows.size();
  if (n < 2) return fit;
  std::vector<double> xs(n), ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double nn = rows[i].n;
    xs[i] = nn * k * d + nn * std::log2(nn);
    ys[i] = rows[i].wall_s;
  }
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx <= 0.0 || syy <= 0.0) return fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double pred = fit.slope * xs[i] + fit.intercept;
    ss_res += (ys[i] - pred) * (ys[i] - pred);
  }
  fit.r_squared = 1.0 - ss_res / syy;
  return fit;
}

}  // namespace

int cmd_bench(const std::vector<int>& n_list, int k, int d,
              const std::string& strategy, std::uint64_t seed,
              const std::string& out_dir) {
  if (n_list.empty()) {
    std::cerr << "bench: need at least one N\n";
    return kExitConfigError;
  }
  Strategy strat;
  try {
    strat = strategy_from_name(strategy);
  } catch (const std::invalid_argument& e) {
    return config_failure(e);
  }
  if (k < 2 || d < 1) {
    std::cerr << "bench: need K >= 2 and D >= 1\n";
    return kExitConfigError;
  }

  try {
    std::vector<BenchRow> rows;
    for (int n : n_list) {
      if (n < 2) {
        std::cerr << "bench: N must be >= 2\n";
        return kExitConfigError;
      }
      rows.push_back(bench_once(n, k, d, strat, seed));
    }
    std::string csv =
        "strategy,n,k,d,dot_products,contraction_madds,vector_madds,"
        "comparisons,wall_time_s\n";
    for (const BenchRow& r : rows) {
      csv += strategy + ',' + std::to_string(r.n) + ',' + std::to_string(k) + ',' +
             std::to_string(d) + ',' + std::to_string(r.counters.dot_products) +
             ',' + std::to_string(r.counters.contraction_madds) + ',' +
             std::to_string(r.counters.vector_madds) + ',' +
             std::to_string(r.counters.comparisons) + ',' + fmt_time(r.wall_s) +
             '\n';
    }

    const ScalingFit fit = fit_scaling(rows, k, d);
    std::string md = "# query scaling report\n\n";
    md += "strategy: " + strategy + ", K=" + std::to_string(k) +
          ", D=" + std::to_string(d) + "\n\n";
    md += "| N | contraction madds | total madds | comparisons | wall (s) | "
          "madds/(NKD) | cmp/(N log2 N) |\n|---|---|---|---|---|---|---|\n";
    for (const BenchRow& r : rows) {
      const double nkd = static_cast<double>(r.n) * k * d;
      const double nlogn = r.n * std::log2(static_cast<double>(r.n));
      char line[256];
      std::snprintf(line, sizeof(line),
                    "| %d | %llu | %llu | %llu | %.6f | %.3f | %.3f |\n", r.n,
                    static_cast<unsigned long long>(r.counters.contraction_madds),
                    static_cast<unsigned long long>(r.counters.total_madds()),
                    static_cast<unsigned long long>(r.counters.comparisons),
                    r.wall_s, r.counters.total_madds() / nkd,
                    r.counters.comparisons / nlogn);
      md += line;
    }
    char fitline[256];
    std::snprintf(fitline, sizeof(fitline),
                  "\nleast-squares wall_time ~ a*(N*K*D + N*log2 N) + b: a=%.3e "
                  "b=%.3e R^2=%.4f\n",
                  fit.slope, fit.intercept, fit.r_squared);
    md += fitline;

    fs::create_directories(out_dir);
    write_file_atomic(fs::path(out_dir) / "bench.csv", csv);
    write_file_atomic(fs::path(out_dir) / "bench_report.md", md);
    std::cout << md;
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kExitRuntimeError;
  }
}

int cmd_dump_features(const std::string& config_path, const std::string& out_path,
                      std::optional<std::uint64_t> seed_override) {
  RunConfig cfg;
  try {
    cfg = load_run_config(config_path);
  } catch (const std::invalid_argument& e) {
    return config_failure(e);
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kExitRuntimeError;
  }
  if (seed_override) cfg.experiment.seed = *seed_override;
  try {
    DomainDataset dataset = make_dataset(cfg.dataset, cfg.experiment.seed);
    std::vector<int> flags(dataset.target_pool_size(), -1);
    if (cfg.experiment.budget_fraction > 0.0) {
      const LoopResult loop = active_learning_loop(cfg.experiment, dataset);
      for (const RoundMetrics& rm : loop.rounds) {
        for (int idx : rm.selected_indices) flags[idx] = rm.round_index;
      }
    }
    dataset.write_feature_csv(out_path, &flags);
    std::cout << "wrote " << out_path << "\n";
    return kExitOk;
  } catch (const std::invalid_argument& e) {
    return config_failure(e);
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kExitRuntimeError;
  }
}

}  // namespace sdm::cli
