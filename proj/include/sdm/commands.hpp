#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace sdm::cli {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntimeError = 1;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitVerifyFailed = 3;

// Runs the active-learning loop and writes rounds.csv + manifest.json.
// Outputs are byte-reproducible under a fixed seed; measured wall times go
// into the query_time_s column only when with_timings is set (they are the
// one non-deterministic quantity, and op counters are the primary
// complexity evidence anyway).
int cmd_simulate(const std::string& config_path, const std::string& out_dir,
                 std::optional<std::uint64_t> seed_override,
                 bool with_timings = false);

// Runs the loop per (strategy, seed) cell and writes compare.csv +
// compare.md with per-strategy mean and sample std of final accuracy.
int cmd_compare(const std::string& config_path,
                const std::vector<std::string>& strategies, int seeds,
                const std::string& out_dir,
                std::optional<std::uint64_t> seed_override);

// Runs the full property battery and writes verify.json; exits nonzero on
// any violation. eta_override < 0 (the --break-eta probe) is rejected up
// front: the harness refuses a negative learning rate.
int cmd_verify(int trials, std::uint64_t seed, const std::string& out_dir,
               std::optional<double> eta_override);

// Times score_pool + select_top_b over the N grid and writes bench.csv plus
// bench_report.md with the least-squares fit of wall time against
// N*K*D + N*log2(N) and the measured counter constants.
int cmd_bench(const std::vector<int>& n_list, int k, int d,
              const std::string& strategy, std::uint64_t seed,
              const std::string& out_dir);

// Writes the dataset in feature-CSV form with a trailing selected_round
// column. With a positive budget the loop runs first and selected samples
// carry their sampling round; otherwise every flag is -1.
int cmd_dump_features(const std::string& config_path,
                      const std::string& out_path,
                      std::optional<std::uint64_t> seed_override);

inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace sdm::cli
