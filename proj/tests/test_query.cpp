#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "oracles.hpp"
#include "sdm/losses.hpp"
#include "sdm/query.hpp"
#include "sdm/rng.hpp"

using namespace sdm;

namespace {

UnlabeledPool make_pool(const std::vector<FeatureVector>& features) {
  UnlabeledPool pool;
  pool.indices.resize(features.size());
  std::iota(pool.indices.begin(), pool.indices.end(), 0);
  for (const FeatureVector& f : features) pool.features.push_back(&f);
  return pool;
}

std::vector<FeatureVector> random_features(Rng& rng, int n, int d) {
  std::vector<FeatureVector> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) out.push_back(oracle::random_feature(rng, d));
  return out;
}

// Instances where the top-2 ranking is stable under small perturbations.
bool top2_stable(const Logits& logits) {
  Logits sorted = logits;
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());
  return sorted[0] - sorted[1] > 1e-3 && sorted[1] - sorted[2] > 1e-3;
}

}  // namespace

TEST_SUITE_BEGIN("query");

TEST_CASE("q_margin examples") {
  CHECK(q_margin({0.7, 0.2, 0.1}) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(q_margin({0.25, 0.25, 0.25, 0.25}) == 1.0);
  const double eps = 1e-6;
  CHECK(q_margin({1.0 - eps, eps, 0.0}) == doctest::Approx(2 * eps).epsilon(1e-6));
}

TEST_CASE("q_margin stays in (0,1], is 1 only on ties, ignores class order") {
  Rng rng(41);
  for (int t = 0; t < 500; ++t) {
    Logits l = oracle::random_logits(rng, 6, 3.0);
    const ProbVector p = softmax(l);
    const double q = q_margin(p);
    CHECK(q > 0.0);
    CHECK(q <= 1.0);
    const auto [i1, i2] = top2(p);
    if (q == 1.0) CHECK(p[i1] == p[i2]);
    // permutation invariance
    ProbVector shuffled = p;
    sdm::shuffle(shuffled, rng);
    CHECK(q_margin(shuffled) == doctest::Approx(q).epsilon(1e-12));
  }
}

TEST_CASE("entropy and confidence scores") {
  CHECK(q_entropy({0.25, 0.25, 0.25, 0.25}) ==
        doctest::Approx(std::log(4.0)).epsilon(1e-12));
  CHECK(q_confidence({0.25, 0.25, 0.25, 0.25}) == doctest::Approx(0.75));
  CHECK(q_entropy({1.0, 0.0, 0.0}) == 0.0);
  CHECK(q_confidence({1.0, 0.0, 0.0}) == 0.0);
}

TEST_CASE("q_random is a pure function of seed and index") {
  for (std::uint64_t seed : {0ULL, 7ULL, 123456789ULL}) {
    for (std::uint64_t idx : {0ULL, 1ULL, 999ULL}) {
      const double v = q_random(seed, idx);
      CHECK(v == q_random(seed, idx));
      CHECK(v >= 0.0);
      CHECK(v < 1.0);
    }
  }
  CHECK(q_random(1, 2) != q_random(1, 3));
  CHECK(q_random(1, 2) != q_random(2, 2));
}

TEST_CASE("grad_f_query vanishes when all class weights coincide") {
  LinearClassifier clf(2, 4);
  Rng rng(42);
  for (int d = 0; d < 4; ++d) {
    const double w = rng.next_normal();
    clf.row(0)[d] = w;
    clf.row(1)[d] = w;
  }
  const FeatureVector f = oracle::random_feature(rng, 4);
  const std::vector<double> g = grad_f_query(f, clf, softmax(classify(clf, f)));
  for (double v : g) CHECK(std::abs(v) <= 1e-15);
}

TEST_CASE("grad_f_query matches central differences at stable points") {
  Rng rng(43);
  int done = 0;
  while (done < 200) {
    const LinearClassifier clf = oracle::random_classifier(rng, 6, 8, 0.5);
    const FeatureVector f = oracle::random_feature(rng, 8);
    const Logits logits = classify(clf, f);
    if (!top2_stable(logits)) continue;
    ++done;
    const std::vector<double> g = grad_f_query(f, clf, softmax(logits));
    for (int d = 0; d < 8; ++d) {
      const double fd = oracle::central_diff(
          [&](double x) {
            FeatureVector pert = f;
            pert[d] = x;
            return q_margin(softmax(classify(clf, pert)));
          },
          f[d]);
      CHECK(oracle::rel_err(g[d], fd) <= 1e-6);
    }
  }
}

// For K = 2 on the side p+ > p-, Q = 2 p- and the gradient collapses to
// 2 p+ p- (w- - w+); derived by direct differentiation.
TEST_CASE("grad_f_query binary closed form") {
  Rng rng(44);
  int done = 0;
  while (done < 100) {
    const LinearClassifier clf = oracle::random_classifier(rng, 2, 5, 0.8);
    const FeatureVector f = oracle::random_feature(rng, 5);
    const Logits l = classify(clf, f);
    if (std::abs(l[0] - l[1]) < 1e-6) continue;
    ++done;
    const ProbVector p = softmax(l);
    const std::vector<double> g = grad_f_query(f, clf, p);
    const double sign = l[0] > l[1] ? 1.0 : -1.0;  // +1 when class 0 leads
    for (int d = 0; d < 5; ++d) {
      const double expect = sign * 2.0 * p[0] * p[1] * (clf.row(1)[d] - clf.row(0)[d]);
      CHECK(std::abs(g[d] - expect) <= 1e-12);
    }
  }
}

TEST_CASE("stepping along the negative query gradient does not raise the score") {
  Rng rng(45);
  int done = 0;
  while (done < 200) {
    const LinearClassifier clf = oracle::random_classifier(rng, 5, 7, 0.5);
    const FeatureVector f = oracle::random_feature(rng, 7);
    const Logits logits = classify(clf, f);
    if (!top2_stable(logits)) continue;
    ++done;
    const std::vector<double> g = grad_f_query(f, clf, softmax(logits));
    FeatureVector stepped = f;
    for (int d = 0; d < 7; ++d) stepped[d] -= 1e-4 * g[d];
    CHECK(q_margin(softmax(classify(clf, stepped))) <=
          q_margin(softmax(logits)) + 1e-9);
  }
}

TEST_CASE("estimated_loss_grad degenerates to the top-label gradient") {
  Rng rng(46);
  const LinearClassifier clf = oracle::random_classifier(rng, 4, 6, 0.7);
  const FeatureVector f = oracle::random_feature(rng, 6);
  const ProbVector onehot = {1.0, 0.0, 0.0, 0.0};
  const std::vector<double> est = estimated_loss_grad(f, clf, onehot, 1.0);
  const std::vector<double> direct = margin_loss_grad_features(f, clf, 0, 1.0);
  for (int d = 0; d < 6; ++d) CHECK(est[d] == direct[d]);
}

TEST_CASE("estimated_loss_grad is zero when both hypothetical labels are satisfied") {
  LinearClassifier clf(2, 2);
  clf.row(0)[0] = 10.0;
  clf.row(1)[1] = 10.0;
  const FeatureVector f = {1.0, 1.0};  // logits (10, 10): both labels inside? no -
  // construct instead scores far apart per hypothesis:
  LinearClassifier tight(2, 1);
  tight.row(0)[0] = 0.0;
  tight.row(1)[0] = 0.0;
  // zero classifier: gradients of both hypotheses are w_other - w_y = 0
  const std::vector<double> g = estimated_loss_grad({3.0}, tight, {0.6, 0.4}, 1.0);
  CHECK(g[0] == 0.0);
}

TEST_CASE("estimated_loss_grad equals the probability-weighted oracle mix") {
  Rng rng(47);
  int done = 0;
  while (done < 100) {
    const LinearClassifier clf = oracle::random_classifier(rng, 5, 6, 0.6);
    const FeatureVector f = oracle::random_feature(rng, 6);
    const Logits logits = classify(clf, f);
    if (!top2_stable(logits)) continue;
    const auto [i1, i2] = top2(logits);
    if (!oracle::away_from_kinks(logits, i1, 1.0) ||
        !oracle::away_from_kinks(logits, i2, 1.0)) {
      continue;
    }
    ++done;
    const ProbVector p = softmax(logits);
    const std::vector<double> est = estimated_loss_grad(f, clf, p, 1.0);
    for (int d = 0; d < 6; ++d) {
      auto fd_for = [&](int label) {
        return oracle::central_diff(
            [&](double x) {
              FeatureVector pert = f;
              pert[d] = x;
              return margin_loss(classify(clf, pert), label, 1.0);
            },
            f[d]);
      };
      const double expect = p[i1] * fd_for(i1) + p[i2] * fd_for(i2);
      CHECK(oracle::rel_err(est[d], expect) <= 1e-6);
    }
  }
}

TEST_CASE("q_sdm_g with lambda 0 is bit-identical to q_margin") {
  Rng rng(48);
  for (int t = 0; t < 200; ++t) {
    const LinearClassifier clf = oracle::random_classifier(rng, 5, 6, 0.7);
    const FeatureVector f = oracle::random_feature(rng, 6);
    CHECK(q_sdm_g(f, clf, 1.0, 0.0) == q_margin(softmax(classify(clf, f))));
  }
}

TEST_CASE("q_sdm_g degenerates gracefully when the query gradient vanishes") {
  LinearClassifier clf(2, 3);
  for (int d = 0; d < 3; ++d) {
    clf.row(0)[d] = 0.5;
    clf.row(1)[d] = 0.5;
  }
  const FeatureVector f = {1.0, -2.0, 0.5};
  CHECK(q_sdm_g(f, clf, 1.0, 0.01) == q_margin(softmax(classify(clf, f))));
}

TEST_CASE("q_sdm_g is bounded by (-lambda, 1 + lambda]") {
  Rng rng(49);
  const double lambda = 0.25;
  for (int t = 0; t < 10000; ++t) {
    const int k = 2 + static_cast<int>(rng.next_index(5));
    const int d = 2 + static_cast<int>(rng.next_index(6));
    const LinearClassifier clf = oracle::random_classifier(rng, k, d, 0.8);
    const FeatureVector f = oracle::random_feature(rng, d);
    const double q = q_sdm_g(f, clf, 1.0, lambda);
    CHECK(q > -lambda);
    CHECK(q <= 1.0 + lambda);
  }
}

TEST_CASE("select_top_b examples and tie rule") {
  const std::vector<QueryScore> scores = {{0, 0.1}, {1, 0.9}, {2, 0.5}};
  CHECK(select_top_b(scores, 2) == std::vector<int>{1, 2});
  const std::vector<QueryScore> ties = {{0, 0.4}, {1, 0.4}, {2, 0.4}};
  CHECK(select_top_b(ties, 2) == std::vector<int>{0, 1});
  CHECK_THROWS_AS(select_top_b(scores, 4), std::invalid_argument);
}

TEST_CASE("select_top_b agrees with the full-sort oracle") {
  Rng rng(50);
  std::vector<QueryScore> scores(1000);
  std::vector<double> raw(1000);
  for (int i = 0; i < 1000; ++i) {
    raw[i] = rng.next_double();
    scores[i] = {i, raw[i]};
  }
  const std::vector<int> got = select_top_b(scores, 100);
  const std::vector<int> order = oracle::sorted_indices_desc(raw);
  for (int i = 0; i < 100; ++i) CHECK(got[i] == order[i]);
}

TEST_CASE("select_top_b is stable under permutations of equal scores") {
  std::vector<QueryScore> scores = {{3, 0.5}, {1, 0.5}, {2, 0.7}, {0, 0.5}};
  const std::vector<int> a = select_top_b(scores, 3);
  std::reverse(scores.begin(), scores.end());
  const std::vector<int> b = select_top_b(scores, 3);
  CHECK(a == b);
  CHECK(a == std::vector<int>{2, 0, 1});
}

TEST_CASE("score_pool counts exactly N*K dot products for margin scoring") {
  Rng rng(51);
  const LinearClassifier clf = oracle::random_classifier(rng, 5, 8, 0.5);
  const std::vector<FeatureVector> features = random_features(rng, 100, 8);
  const UnlabeledPool pool = make_pool(features);
  QueryConfig cfg;
  cfg.strategy = Strategy::kMargin;
  OpCounters counters;
  const std::vector<QueryScore> scores = score_pool(pool, clf, cfg, counters);
  CHECK(scores.size() == 100);
  CHECK(counters.dot_products == 500);
  CHECK(counters.contraction_madds == 100ULL * 5 * 8);
  // pool order is preserved
  for (int i = 0; i < 100; ++i) CHECK(scores[i].sample_index == i);
}

TEST_CASE("random strategy touches the classifier not at all") {
  Rng rng(52);
  const LinearClassifier clf = oracle::random_classifier(rng, 4, 6, 0.5);
  const std::vector<FeatureVector> features = random_features(rng, 50, 6);
  const UnlabeledPool pool = make_pool(features);
  QueryConfig cfg;
  cfg.strategy = Strategy::kRandom;
  cfg.seed = 9;
  OpCounters counters;
  const std::vector<QueryScore> scores = score_pool(pool, clf, cfg, counters);
  CHECK(counters.dot_products == 0);
  CHECK(counters.contraction_madds == 0);
  CHECK(counters.vector_madds == 0);
  for (const QueryScore& s : scores) {
    CHECK(s.score == q_random(9, static_cast<std::uint64_t>(s.sample_index)));
  }
}

TEST_CASE("sdm_g contraction counter is exactly 4*N*K*D and scales exactly") {
  Rng rng(53);
  auto run = [&rng](int n, int k, int d) {
    Rng local(1234);
    const LinearClassifier clf = oracle::random_classifier(local, k, d, 0.4);
    const std::vector<FeatureVector> features = random_features(local, n, d);
    const UnlabeledPool pool = make_pool(features);
    QueryConfig cfg;
    cfg.strategy = Strategy::kSdmG;
    OpCounters counters;
    score_pool(pool, clf, cfg, counters);
    return counters;
  };
  const OpCounters base = run(40, 5, 8);
  CHECK(base.contraction_madds == 4ULL * 40 * 5 * 8);
  CHECK(run(80, 5, 8).contraction_madds == 2 * base.contraction_madds);
  CHECK(run(40, 10, 8).contraction_madds == 2 * base.contraction_madds);
  CHECK(run(40, 5, 16).contraction_madds == 2 * base.contraction_madds);
  // total multiply-adds stay within the documented constant
  CHECK(base.total_madds() <= 8ULL * 40 * 5 * 8);
}

TEST_CASE("sdm_g pool scores equal the one-shot scorer bit for bit") {
  Rng rng(54);
  const LinearClassifier clf = oracle::random_classifier(rng, 6, 7, 0.6);
  const std::vector<FeatureVector> features = random_features(rng, 30, 7);
  const UnlabeledPool pool = make_pool(features);
  QueryConfig cfg;
  cfg.strategy = Strategy::kSdmG;
  cfg.m = 1.0;
  cfg.lambda = 0.01;
  OpCounters counters;
  const std::vector<QueryScore> scores = score_pool(pool, clf, cfg, counters);
  for (int i = 0; i < 30; ++i) {
    CHECK(scores[i].score == q_sdm_g(features[i], clf, 1.0, 0.01));
  }
}

TEST_CASE("selection comparisons stay within a sort-sized budget") {
  Rng rng(55);
  std::vector<QueryScore> scores(4096);
  for (int i = 0; i < 4096; ++i) scores[i] = {i, rng.next_double()};
  OpCounters counters;
  select_top_b(scores, 41, &counters);
  const double n = 4096.0;
  CHECK(counters.comparisons <= static_cast<std::uint64_t>(3.0 * n * std::log2(n)));
}

TEST_CASE("strategy names round-trip and bad names are rejected") {
  for (const std::string& name : strategy_names()) {
    CHECK(strategy_name(strategy_from_name(name)) == name);
  }
  CHECK_THROWS_WITH_AS(strategy_from_name("qbc"),
                       doctest::Contains("valid: random, entropy"),
                       std::invalid_argument);
}

TEST_SUITE_END();
