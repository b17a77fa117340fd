#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "sdm/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"margin-based active domain adaptation toolkit"};
  app.require_subcommand(1);

  std::optional<std::uint64_t> seed_override;
  app.add_option("--seed", seed_override, "override the config seed")
      ->expected(1);

  std::string config_path;
  std::string out_dir = ".";

  auto* simulate = app.add_subcommand("simulate", "run one active-learning experiment");
  bool with_timings = false;
  simulate->add_option("--config", config_path, "config JSON")->required();
  simulate->add_option("--out", out_dir, "output directory");
  simulate->add_flag("--timings", with_timings,
                     "record measured query wall times in rounds.csv (off by "
                     "default so outputs stay byte-reproducible)");

  auto* compare = app.add_subcommand("compare", "run a strategy comparison sweep");
  std::vector<std::string> strategies;
  int seeds = 1;
  compare->add_option("--config", config_path, "config JSON")->required();
  compare->add_option("--strategies", strategies, "strategy names")
      ->required()
      ->delimiter(',');
  compare->add_option("--seeds", seeds, "number of seeds per strategy");
  compare->add_option("--out", out_dir, "output directory");

  auto* verify = app.add_subcommand("verify", "run the property battery");
  int trials = 200;
  std::uint64_t verify_seed = 1;
  std::optional<double> break_eta;
  verify->add_option("--trials", trials, "trials per check");
  verify->add_option("--seed", verify_seed, "harness seed");
  verify->add_option("--break-eta", break_eta,
                     "override the harness learning rate (negative values are rejected)");
  verify->add_option("--out", out_dir, "output directory");

  auto* bench = app.add_subcommand("bench", "measure query scaling");
  std::vector<int> n_list;
  int bench_k = 31;
  int bench_d = 256;
  std::string bench_strategy = "sdm_g";
  std::uint64_t bench_seed = 1;
  bench->add_option("--n", n_list, "pool sizes")->required()->delimiter(',');
  bench->add_option("--k", bench_k, "number of classes");
  bench->add_option("--d", bench_d, "feature dimension");
  bench->add_option("--strategy", bench_strategy, "query strategy");
  bench->add_option("--bench-seed", bench_seed, "data seed");
  bench->add_option("--out", out_dir, "output directory");

  auto* dump = app.add_subcommand("dump-features", "dump the dataset with selection flags");
  std::string dump_out = "features.csv";
  dump->add_option("--config", config_path, "config JSON")->required();
  dump->add_option("--out", dump_out, "output CSV path");

  CLI11_PARSE(app, argc, argv);

  if (simulate->parsed()) {
    return sdm::cli::cmd_simulate(config_path, out_dir, seed_override, with_timings);
  }
  if (compare->parsed()) {
    return sdm::cli::cmd_compare(config_path, strategies, seeds, out_dir,
                                 seed_override);
  }
  if (verify->parsed()) {
    if (seed_override) verify_seed = *seed_override;
    return sdm::cli::cmd_verify(trials, verify_seed, out_dir, break_eta);
  }
  if (bench->parsed()) {
    if (seed_override) bench_seed = *seed_override;
    return sdm::cli::cmd_bench(n_list, bench_k, bench_d, bench_strategy,
                               bench_seed, out_dir);
  }
  if (dump->parsed()) {
    return sdm::cli::cmd_dump_features(config_path, dump_out, seed_override);
  }
  return sdm::cli::kExitConfigError;
}
