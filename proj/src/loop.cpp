#include "sdm/loop.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "sdm/theory.hpp"

namespace sdm {

int fraction_count(double fraction, int n) {
  if (fraction <= 0.0) return 0;
  const int c = static_cast<int>(std::floor(fraction * n + 0.5));
  return c < 1 ? 1 : c;
}

QueryConfig round_query_config(const ExperimentConfig& cfg, int round) {
  QueryConfig qcfg;
  qcfg.strategy = cfg.strategy;
  qcfg.lambda = cfg.lambda;
  qcfg.m = cfg.m;
  const std::uint64_t base = Rng(cfg.seed).branch(3).next_u64();
  qcfg.seed = base ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(round));
  return qcfg;
}

double evaluate_accuracy(const LinearClassifier& clf, std::span<const Sample> set) {
  if (set.empty()) throw std::invalid_argument("evaluate_accuracy: empty set");
  int correct = 0;
  for (const Sample& s : set) {
    const Logits logits = classify(clf, s.f);
    int arg = 0;
    for (int k = 1; k < static_cast<int>(logits.size()); ++k) {
      if (logits[k] > logits[arg]) arg = k;  // ties keep the lower index
    }
    if (arg == s.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(set.size());
}

namespace {

void validate(const ExperimentConfig& cfg) {
  if (cfg.loss == LossKind::kCrossEntropy) {
    throw std::invalid_argument(
        "ExperimentConfig: loss must be margin or dynamic_margin (cross entropy "
        "is the auxiliary term)");
  }
  if (!(cfg.lr > 0.0)) throw std::invalid_argument("ExperimentConfig: lr must be > 0");
  if (!(cfg.m > 0.0)) throw std::invalid_argument("ExperimentConfig: m must be > 0");
  if (cfg.lambda < 0.0) throw std::invalid_argument("ExperimentConfig: lambda must be >= 0");
  if (cfg.batch_size < 1) throw std::invalid_argument("ExperimentConfig: batch_size must be >= 1");
  if (cfg.initial_epochs < 0 || cfg.epochs_between_samplings < 0) {
    throw std::invalid_argument("ExperimentConfig: epochs must be >= 0");
  }
  if (cfg.budget_fraction < 0.0 || cfg.budget_fraction > 1.0) {
    throw std::invalid_argument("ExperimentConfig: budget_fraction must be in [0, 1]");
  }
  if (cfg.budget_fraction > 0.0 &&
      (cfg.step_fraction <= 0.0 || cfg.step_fraction > cfg.budget_fraction)) {
    throw std::invalid_argument(
        "ExperimentConfig: need 0 < step_fraction <= budget_fraction");
  }
  if (cfg.ce_weight < 0.0) throw std::invalid_argument("ExperimentConfig: ce_weight must be >= 0");
}

void sgd_step(LinearClassifier& clf, std::span<const Sample> batch,
              const ExperimentConfig& cfg) {
  std::vector<double> grad = weight_gradient(batch, clf, cfg.loss, cfg.m);
  if (cfg.ce_weight > 0.0) {
    const std::vector<double> ce =
        weight_gradient(batch, clf, LossKind::kCrossEntropy, cfg.m);
    for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += cfg.ce_weight * ce[i];
  }
  const double scale =
      cfg.mean_reduction ? cfg.lr / static_cast<double>(batch.size()) : cfg.lr;
  for (std::size_t i = 0; i < grad.size(); ++i) clf.weights[i] -= scale * grad[i];
}

}  // namespace

LinearClassifier train_epochs(LinearClassifier clf, const DomainDataset& dataset,
                              const ExperimentConfig& cfg, int epochs, Rng& rng) {
  validate(cfg);
  if (epochs == 0) return clf;
  std::vector<Sample> pool(dataset.source());
  pool.insert(pool.end(), dataset.labeled_target().begin(),
              dataset.labeled_target().end());
  if (pool.empty()) throw std::invalid_argument("train_epochs: no labeled data");
  for (int e = 0; e < epochs; ++e) {
    shuffle(pool, rng);
    for (std::size_t start = 0; start < pool.size(); start += cfg.batch_size) {
      const std::size_t len = std::min<std::size_t>(cfg.batch_size, pool.size() - start);
      sgd_step(clf, std::span<const Sample>(pool.data() + start, len), cfg);
    }
  }
  return clf;
}

LoopResult active_learning_loop(const ExperimentConfig& cfg, DomainDataset& dataset) {
  validate(cfg);
  const int n_target = dataset.target_pool_size();
  const int budget = fraction_count(cfg.budget_fraction, n_target);
  const int step = fraction_count(cfg.step_fraction, n_target);

  Rng master(cfg.seed);
  Rng train_rng = master.branch(1);
  Rng init_rng = master.branch(2);

  LinearClassifier clf(dataset.num_classes(), dataset.dim());
  if (cfg.random_init) {
    for (double& w : clf.weights) w = 0.01 * init_rng.next_normal();
  }

  LoopResult result;
  auto emit = [&](int round, double wall_s, const OpCounters& counters,
                  std::vector<int> selected) {
    RoundMetrics rm;
    rm.round_index = round;
    rm.labeled_target_count = static_cast<int>(dataset.labeled_target().size());
    rm.target_test_accuracy = evaluate_accuracy(clf, dataset.target_test());
    if (dataset.num_classes() == 2) {
      std::vector<FeatureVector> feats;
      feats.reserve(dataset.source().size());
      for (const Sample& s : dataset.source()) feats.push_back(s.f);
      rm.source_margin_fraction =
          margin_divergence_fraction(feats, binary_restriction(clf), cfg.m);
    }
    rm.query_wall_time_s = wall_s;
    rm.op_counters = counters;
    rm.selected_indices = std::move(selected);
    result.rounds.push_back(std::move(rm));
  };

  clf = train_epochs(std::move(clf), dataset, cfg, cfg.initial_epochs, train_rng);
  emit(0, 0.0, OpCounters{}, {});

  int round = 0;
  while (static_cast<int>(dataset.labeled_target().size()) < budget) {
    ++round;
    const int remaining = budget - static_cast<int>(dataset.labeled_target().size());
    const int take = std::min(step, remaining);

    const QueryConfig qcfg = round_query_config(cfg, round);

    OpCounters counters;
    const auto t0 = std::chrono::steady_clock::now();
    const UnlabeledPool pool = dataset.unlabeled_pool();
    const std::vector<QueryScore> scores = score_pool(pool, clf, qcfg, counters);
    const std::vector<int> selected = select_top_b(scores, take, &counters);
    const auto t1 = std::chrono::steady_clock::now();

    for (int idx : selected) dataset.oracle_annotate(idx);
    clf = train_epochs(std::move(clf), dataset, cfg, cfg.epochs_between_samplings,
                       train_rng);
    emit(round, std::chrono::duration<double>(t1 - t0).count(), counters, selected);
  }

  result.final_clf = std::move(clf);
  return result;
}

}  // namespace sdm
