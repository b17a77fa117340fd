#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sdm/core.hpp"

namespace sdm {

enum class Strategy { kRandom, kEntropy, kConfidence, kMargin, kSdmG };

// Throws std::invalid_argument listing the valid names on a bad name.
Strategy strategy_from_name(const std::string& name);
std::string strategy_name(Strategy s);
std::vector<std::string> strategy_names();

struct QueryConfig {
  Strategy strategy = Strategy::kMargin;
  double lambda = 0.01;  // weight of the gradient-consistency term
  double m = 1.0;
  std::uint64_t seed = 0;  // stream for the random strategy
};

struct QueryScore {
  int sample_index = 0;  // original target-pool position
  double score = 0.0;
};

// Exact operation counts; these, not wall times, are the complexity
// evidence. contraction_madds counts multiply-adds inside K x D shaped
// contractions (dot products, weighted classifier sums, gated gradient
// sums over all classes) and is exactly 4*N*K*D per sdm_g pool scan.
// vector_madds counts multiply-adds in D-length combines. Counters are
// incremented by the closed-form size of each operation, and the scoring
// loops are written densely so executed work matches the count.
struct OpCounters {
  std::uint64_t dot_products = 0;
  std::uint64_t contraction_madds = 0;
  std::uint64_t vector_madds = 0;
  std::uint64_t comparisons = 0;

  std::uint64_t total_madds() const { return contraction_madds + vector_madds; }
  OpCounters& operator+=(const OpCounters& o) {
    dot_products += o.dot_products;
    contraction_madds += o.contraction_madds;
    vector_madds += o.vector_madds;
    comparisons += o.comparisons;
    return *this;
  }
};

// Label-free view of the unlabeled target pool. Query code only ever sees
// this; hidden labels stay inside DomainDataset.
struct UnlabeledPool {
  std::vector<int> indices;
  std::vector<const FeatureVector*> features;
};

// 1 - (p_1* - p_2*); in (0, 1], equal to 1 exactly when the top two
// probabilities tie.
double q_margin(const ProbVector& probs);

double q_entropy(const ProbVector& probs);    // -sum p log p
double q_confidence(const ProbVector& probs); // 1 - p_1*
double q_random(std::uint64_t seed, std::uint64_t sample_index);

// Gradient of the margin-sampling score w.r.t. the feature:
//   p_2* w_2* - p_1* w_1* - (p_2* - p_1*) sum_i p_i w_i
// Caller guarantees probs == softmax(classify(clf, f)).
std::vector<double> grad_f_query(const FeatureVector& f,
                                 const LinearClassifier& clf,
                                 const ProbVector& probs);

// Label-free loss-gradient estimate:
//   p_1* grad_f L_m(x, 1*) + p_2* grad_f L_m(x, 2*)
std::vector<double> estimated_loss_grad(const FeatureVector& f,
                                        const LinearClassifier& clf,
                                        const ProbVector& probs, double m);

// q_margin + lambda * cos(estimated_loss_grad, grad_f_query). If either
// gradient norm falls below 1e-12 the cosine term is 0.
double q_sdm_g(const FeatureVector& f, const LinearClassifier& clf, double m,
               double lambda);

// Indices of the b largest scores, descending, ties broken by the lower
// sample index. Throws if b exceeds the number of scores.
std::vector<int> select_top_b(const std::vector<QueryScore>& scores, int b,
                              OpCounters* counters = nullptr);

// Scores every sample in the pool, in pool order, with the configured
// strategy. The random strategy performs no classifier work at all.
std::vector<QueryScore> score_pool(const UnlabeledPool& pool,
                                   const LinearClassifier& clf,
                                   const QueryConfig& config,
                                   OpCounters& counters);

}  // namespace sdm
