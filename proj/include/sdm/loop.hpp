#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sdm/core.hpp"
#include "sdm/data.hpp"
#include "sdm/losses.hpp"
#include "sdm/query.hpp"
#include "sdm/rng.hpp"

namespace sdm {

// Training schedule and query settings for one active-learning run.
// Defaults follow the reference recipe: lr 0.01, batch 72, margin 1,
// lambda 0.01, 10 initial epochs, sampling every 2 epochs, a 5% budget
// reached in 1% steps.
struct ExperimentConfig {
  LossKind loss = LossKind::kMargin;  // kMargin or kDynamicMargin
  double ce_weight = 1.0;             // auxiliary cross-entropy on all labeled data
  double m = 1.0;
  double lambda = 0.01;
  double lr = 0.01;
  int batch_size = 72;
  int initial_epochs = 10;
  int epochs_between_samplings = 2;
  double budget_fraction = 0.05;
  double step_fraction = 0.01;
  Strategy strategy = Strategy::kMargin;
  bool mean_reduction = false;  // batch reduction is the sum by default
  bool random_init = false;     // zero init by default
  std::uint64_t seed = 0;
};

struct RoundMetrics {
  int round_index = 0;
  int labeled_target_count = 0;
  double target_test_accuracy = 0.0;
  // Empirical divergence diagnostic on the source set; binary runs only,
  // -1 otherwise.
  double source_margin_fraction = -1.0;
  double query_wall_time_s = 0.0;
  OpCounters op_counters;
  std::vector<int> selected_indices;
};

// Round-half-up of fraction * n, with a minimum of 1 for any positive
// fraction; 0 for fraction <= 0.
int fraction_count(double fraction, int n);

// Query configuration the loop uses in a given sampling round (rounds are
// 1-based). Part of the determinism contract: the random strategy's stream
// is a pure function of (config seed, round).
QueryConfig round_query_config(const ExperimentConfig& cfg, int round);

// Top-1 accuracy; argmax ties resolve to the lowest class index.
double evaluate_accuracy(const LinearClassifier& clf, std::span<const Sample> set);

// Minibatch SGD over source + labeled target, shuffled per epoch from rng,
// stepping along the configured margin-variant loss plus ce_weight times
// the auxiliary cross entropy. Fixed learning rate, no decay.
LinearClassifier train_epochs(LinearClassifier clf, const DomainDataset& dataset,
                              const ExperimentConfig& cfg, int epochs, Rng& rng);

struct LoopResult {
  std::vector<RoundMetrics> rounds;
  LinearClassifier final_clf;
};

// The budgeted loop: initial training on source, then repeated
// score -> select -> annotate -> train rounds until the labeled-target
// budget is reached. Metrics are emitted after initial training (round 0)
// and after every sampling round. A zero budget degenerates to source-only
// training with the single round-0 record.
LoopResult active_learning_loop(const ExperimentConfig& cfg, DomainDataset& dataset);

}  // namespace sdm
