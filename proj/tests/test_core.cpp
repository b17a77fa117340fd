#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "sdm/core.hpp"
#include "sdm/rng.hpp"

using namespace sdm;

TEST_SUITE_BEGIN("core");

TEST_CASE("classify zero weights gives zero logits") {
  LinearClassifier clf(4, 3);
  const Logits l = classify(clf, {1.0, -2.0, 7.5});
  for (double v : l) CHECK(v == 0.0);
}

TEST_CASE("classify is the plain dot product") {
  LinearClassifier clf(2, 2);
  clf.row(0)[0] = 1.0;
  clf.row(1)[1] = 1.0;
  const Logits l = classify(clf, {3.0, 5.0});
  CHECK(l[0] == 3.0);
  CHECK(l[1] == 5.0);
}

TEST_CASE("classify matches the naive double-loop oracle") {
  Rng rng(42);
  for (int t = 0; t < 50; ++t) {
    const LinearClassifier clf = oracle::random_classifier(rng, 6, 16);
    const FeatureVector f = oracle::random_feature(rng, 16);
    const Logits l = classify(clf, f);
    const std::vector<double> expect = oracle::naive_classify(clf, f);
    for (int k = 0; k < 6; ++k) CHECK(std::abs(l[k] - expect[k]) <= 1e-12);
  }
}

TEST_CASE("classify rejects dimension mismatch") {
  LinearClassifier clf(3, 4);
  CHECK_THROWS_AS(classify(clf, {1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("classify is linear") {
  Rng rng(7);
  for (int t = 0; t < 20; ++t) {
    const LinearClassifier clf = oracle::random_classifier(rng, 5, 8);
    const FeatureVector f1 = oracle::random_feature(rng, 8);
    const FeatureVector f2 = oracle::random_feature(rng, 8);
    const double a = rng.next_normal();
    const double b = rng.next_normal();
    FeatureVector mix(8);
    for (int j = 0; j < 8; ++j) mix[j] = a * f1[j] + b * f2[j];
    const Logits lm = classify(clf, mix);
    const Logits l1 = classify(clf, f1);
    const Logits l2 = classify(clf, f2);
    for (int k = 0; k < 5; ++k) {
      CHECK(std::abs(lm[k] - (a * l1[k] + b * l2[k])) <= 1e-9);
    }
  }
}

TEST_CASE("softmax of equal logits is uniform") {
  const ProbVector p = softmax({2.5, 2.5, 2.5, 2.5});
  for (double v : p) CHECK(v == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("softmax survives huge logits") {
  const ProbVector p = softmax({1000.0, 0.0});
  CHECK(std::isfinite(p[0]));
  CHECK(p[0] == doctest::Approx(1.0));
  CHECK(p[1] == doctest::Approx(0.0));
}

TEST_CASE("softmax matches direct high-precision evaluation") {
  const ProbVector p = softmax({1.0, 2.0, 3.0});
  // expected values computed with long double arithmetic
  const long double e1 = expl(1.0L), e2 = expl(2.0L), e3 = expl(3.0L);
  const long double z = e1 + e2 + e3;
  CHECK(std::abs(p[0] - static_cast<double>(e1 / z)) <= 1e-15);
  CHECK(std::abs(p[1] - static_cast<double>(e2 / z)) <= 1e-15);
  CHECK(std::abs(p[2] - static_cast<double>(e3 / z)) <= 1e-15);
  CHECK(p[0] + p[1] + p[2] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("softmax output is a valid probability vector at extreme scales") {
  Rng rng(3);
  for (int t = 0; t < 200; ++t) {
    Logits l(5);
    for (double& v : l) v = (rng.next_double() * 2.0 - 1.0) * 1e4;
    const ProbVector p = softmax(l);
    double sum = 0.0;
    for (double v : p) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
      sum += v;
    }
    CHECK(std::abs(sum - 1.0) <= 1e-9);
  }
}

TEST_CASE("softmax is shift invariant") {
  Rng rng(11);
  for (int t = 0; t < 100; ++t) {
    const Logits l = oracle::random_logits(rng, 6, 3.0);
    const double c = 10.0 * rng.next_normal();
    Logits shifted = l;
    for (double& v : shifted) v += c;
    const ProbVector p1 = softmax(l);
    const ProbVector p2 = softmax(shifted);
    for (int k = 0; k < 6; ++k) CHECK(std::abs(p1[k] - p2[k]) <= 1e-12);
  }
}

TEST_CASE("top2 basics and tie rule") {
  CHECK(top2({0.7, 0.2, 0.1}) == std::pair<int, int>{0, 1});
  CHECK(top2({0.5, 0.5}) == std::pair<int, int>{0, 1});
  CHECK(top2({0.2, 0.2, 0.6}) == std::pair<int, int>{2, 0});
  CHECK_THROWS_AS(top2({1.0}), std::invalid_argument);
}

TEST_CASE("top2 agrees with the full-sort oracle") {
  Rng rng(5);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> v(10);
    for (double& x : v) x = rng.next_double();
    const auto [i1, i2] = top2(v);
    const std::vector<int> sorted = oracle::sorted_indices_desc(v);
    CHECK(i1 == sorted[0]);
    CHECK(i2 == sorted[1]);
  }
}

TEST_CASE("top2 is invariant under softmax") {
  Rng rng(9);
  for (int t = 0; t < 100; ++t) {
    const Logits l = oracle::random_logits(rng, 7, 2.0);
    CHECK(top2(l) == top2(softmax(l)));
  }
}

TEST_CASE("LinearClassifier validates its shape") {
  CHECK_THROWS_AS(LinearClassifier(1, 4), std::invalid_argument);
  CHECK_THROWS_AS(LinearClassifier(3, 0), std::invalid_argument);
}

TEST_SUITE_END();
