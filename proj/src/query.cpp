#include "sdm/query.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sdm/losses.hpp"
#include "sdm/rng.hpp"

namespace sdm {

Strategy strategy_from_name(const std::string& name) {
  if (name == "random") return Strategy::kRandom;
  if (name == "entropy") return Strategy::kEntropy;
  if (name == "confidence") return Strategy::kConfidence;
  if (name == "margin") return Strategy::kMargin;
  if (name == "sdm_g") return Strategy::kSdmG;
  throw std::invalid_argument(
      "unknown strategy '" + name +
      "' (valid: random, entropy, confidence, margin, sdm_g)");
}

std::string strategy_name(Strategy s) {
  switch (s) {
    case Strategy::kRandom: return "random";
    case Strategy::kEntropy: return "entropy";
    case Strategy::kConfidence: return "confidence";
    case Strategy::kMargin: return "margin";
    case Strategy::kSdmG: return "sdm_g";
  }
  return "?";
}

std::vector<std::string> strategy_names() {
  return {"random", "entropy", "confidence", "margin", "sdm_g"};
}

double q_margin(const ProbVector& probs) {
  const auto [i1, i2] = top2(probs);
  return 1.0 - (probs[i1] - probs[i2]);
}

double q_entropy(const ProbVector& probs) {
  double h = 0.0;
  for (double p : probs) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

double q_confidence(const ProbVector& probs) {
  return 1.0 - *std::max_element(probs.begin(), probs.end());
}

double q_random(std::uint64_t seed, std::uint64_t sample_index) {
  return hash_to_unit(seed, sample_index);
}

namespace {

// Scoring internals shared by the public one-shot functions and the
// instrumented pool scan, so both produce bit-identical values. Counters
// are advanced by the closed-form size of each operation; the gradient
// loops run densely over all K classes (inactive classes multiply by 0),
// which keeps the executed multiply-adds equal to the count and exactly
// linear in N, K and D.

Logits classify_counted(const LinearClassifier& clf, const FeatureVector& f,
                        OpCounters* c) {
  if (c != nullptr) {
    c->dot_products += clf.num_classes;
    c->contraction_madds +=
        static_cast<std::uint64_t>(clf.num_classes) * clf.dim;
  }
  return classify(clf, f);
}

std::pair<int, int> top2_counted(const std::vector<double>& v, OpCounters* c) {
  if (c != nullptr) c->comparisons += 2 * (v.size() - 1);
  return top2(v);
}

// grad = sum_i gate_i * (w_i - w_y) with gate_y forced to 0.
void margin_feature_grad_dense(const LinearClassifier& clf, const Logits& logits,
                               int y, double m, std::vector<double>& out,
                               OpCounters* c) {
  std::fill(out.begin(), out.end(), 0.0);
  const double* wy = clf.row(y);
  for (int i = 0; i < clf.num_classes; ++i) {
    const double gate =
        (i != y && m - logits[y] + logits[i] > 0.0) ? 1.0 : 0.0;
    const double* wi = clf.row(i);
    for (int d = 0; d < clf.dim; ++d) out[d] += gate * (wi[d] - wy[d]);
  }
  if (c != nullptr) {
    c->contraction_madds += static_cast<std::uint64_t>(clf.num_classes) * clf.dim;
  }
}

void query_feature_grad(const LinearClassifier& clf, const ProbVector& probs,
                        int i1, int i2, std::vector<double>& out,
                        std::vector<double>& wbar, OpCounters* c) {
  const int k = clf.num_classes;
  const int d = clf.dim;
  std::fill(wbar.begin(), wbar.end(), 0.0);
  for (int i = 0; i < k; ++i) {
    const double* wi = clf.row(i);
    for (int j = 0; j < d; ++j) wbar[j] += probs[i] * wi[j];
  }
  const double p1 = probs[i1];
  const double p2 = probs[i2];
  const double* w1 = clf.row(i1);
  const double* w2 = clf.row(i2);
  for (int j = 0; j < d; ++j) {
    out[j] = p2 * w2[j] - p1 * w1[j] - (p2 - p1) * wbar[j];
  }
  if (c != nullptr) {
    c->contraction_madds += static_cast<std::uint64_t>(k) * d;
    c->vector_madds += 3ULL * d;
  }
}

double cosine_guarded(const std::vector<double>& a, const std::vector<double>& b,
                      OpCounters* c) {
  const int d = static_cast<int>(a.size());
  const double ab = dot(a.data(), b.data(), d);
  const double na = std::sqrt(dot(a.data(), a.data(), d));
  const double nb = std::sqrt(dot(b.data(), b.data(), d));
  if (c != nullptr) c->vector_madds += 3ULL * d;
  if (na < 1e-12 || nb < 1e-12) return 0.0;
  return ab / (na * nb);
}

struct SdmGWorkspace {
  std::vector<double> wbar, gq, g1, g2, ge;
  explicit SdmGWorkspace(int d) : wbar(d), gq(d), g1(d), g2(d), ge(d) {}
};

double sdm_g_score(const FeatureVector& f, const LinearClassifier& clf, double m,
                   double lambda, SdmGWorkspace& ws, OpCounters* c) {
  const Logits logits = classify_counted(clf, f, c);
  const ProbVector probs = softmax(logits);
  const auto [i1, i2] = top2_counted(probs, c);
  const double q = 1.0 - (probs[i1] - probs[i2]);

  query_feature_grad(clf, probs, i1, i2, ws.gq, ws.wbar, c);
  margin_feature_grad_dense(clf, logits, i1, m, ws.g1, c);
  margin_feature_grad_dense(clf, logits, i2, m, ws.g2, c);
  for (int j = 0; j < clf.dim; ++j) {
    ws.ge[j] = probs[i1] * ws.g1[j] + probs[i2] * ws.g2[j];
  }
  if (c != nullptr) c->vector_madds += 2ULL * clf.dim;

  return q + lambda * cosine_guarded(ws.ge, ws.gq, c);
}

}  // namespace

std::vector<double> grad_f_query(const FeatureVector& f,
                                 const LinearClassifier& clf,
                                 const ProbVector& probs) {
  if (static_cast<int>(f.size()) != clf.dim) {
    throw std::invalid_argument("grad_f_query: dimension mismatch");
  }
  if (static_cast<int>(probs.size()) != clf.num_classes) {
    throw std::invalid_argument("grad_f_query: probs size mismatch");
  }
  const auto [i1, i2] = top2(probs);
  std::vector<double> out(clf.dim), wbar(clf.dim);
  query_feature_grad(clf, probs, i1, i2, out, wbar, nullptr);
  return out;
}

std::vector<double> estimated_loss_grad(const FeatureVector& f,
                                        const LinearClassifier& clf,
                                        const ProbVector& probs, double m) {
  if (static_cast<int>(f.size()) != clf.dim) {
    throw std::invalid_argument("estimated_loss_grad: dimension mismatch");
  }
  const Logits logits = classify(clf, f);
  const auto [i1, i2] = top2(probs);
  std::vector<double> g1(clf.dim), g2(clf.dim), out(clf.dim);
  margin_feature_grad_dense(clf, logits, i1, m, g1, nullptr);
  margin_feature_grad_dense(clf, logits, i2, m, g2, nullptr);
  for (int j = 0; j < clf.dim; ++j) out[j] = probs[i1] * g1[j] + probs[i2] * g2[j];
  return out;
}

double q_sdm_g(const FeatureVector& f, const LinearClassifier& clf, double m,
               double lambda) {
  if (lambda < 0.0) throw std::invalid_argument("q_sdm_g: lambda must be >= 0");
  SdmGWorkspace ws(clf.dim);
  return sdm_g_score(f, clf, m, lambda, ws, nullptr);
}

std::vector<int> select_top_b(const std::vector<QueryScore>& scores, int b,
                              OpCounters* counters) {
  if (b < 0 || b > static_cast<int>(scores.size())) {
    throw std::invalid_argument("select_top_b: b=" + std::to_string(b) +
                                " exceeds pool size " +
                                std::to_string(scores.size()));
  }
  std::vector<QueryScore> sorted(scores);
  std::uint64_t cmp = 0;
  std::sort(sorted.begin(), sorted.end(),
            [&cmp](const QueryScore& a, const QueryScore& b2) {
              ++cmp;
              if (a.score != b2.score) return a.score > b2.score;
              return a.sample_index < b2.sample_index;
            });
  if (counters != nullptr) counters->comparisons += cmp;
  std::vector<int> out(b);
  for (int i = 0; i < b; ++i) out[i] = sorted[i].sample_index;
  return out;
}

std::vector<QueryScore> score_pool(const UnlabeledPool& pool,
                                   const LinearClassifier& clf,
                                   const QueryConfig& config,
                                   OpCounters& counters) {
  const std::size_t n = pool.indices.size();
  if (pool.features.size() != n) {
    throw std::invalid_argument("score_pool: pool index/feature size mismatch");
  }
  std::vector<QueryScore> scores;
  scores.reserve(n);
  SdmGWorkspace ws(clf.dim);
  for (std::size_t i = 0; i < n; ++i) {
    const int index = pool.indices[i];
    double s = 0.0;
    switch (config.strategy) {
      case Strategy::kRandom:
        s = q_random(config.seed, static_cast<std::uint64_t>(index));
        break;
      case Strategy::kEntropy:
        s = q_entropy(softmax(classify_counted(clf, *pool.features[i], &counters)));
        break;
      case Strategy::kConfidence: {
        const ProbVector p =
            softmax(classify_counted(clf, *pool.features[i], &counters));
        counters.comparisons += p.size() - 1;
        s = q_confidence(p);
        break;
      }
      case Strategy::kMargin: {
        const ProbVector p =
            softmax(classify_counted(clf, *pool.features[i], &counters));
        const auto [i1, i2] = top2_counted(p, &counters);
        s = 1.0 - (p[i1] - p[i2]);
        break;
      }
      case Strategy::kSdmG:
        s = sdm_g_score(*pool.features[i], clf, config.m, config.lambda, ws,
                        &counters);
        break;
    }
    scores.push_back({index, s});
  }
  return scores;
}

}  // namespace sdm
