#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace sdm {

// Everything downstream operates on precomputed feature vectors; raw inputs
// never appear. All arithmetic is double precision: the verification harness
// asserts identities at the 1e-9 level and below.
using FeatureVector = std::vector<double>;
using Logits = std::vector<double>;
using ProbVector = std::vector<double>;

struct Sample {
  FeatureVector f;
  int label = 0;
};

// K x D row-major weight matrix; row k scores class k. There is no bias
// term: the binary-margin analysis assumes pure w^T x, and a constant-1
// feature emulates a bias where one is wanted.
struct LinearClassifier {
  int num_classes = 0;
  int dim = 0;
  std::vector<double> weights;  // size K * D

  LinearClassifier() = default;
  LinearClassifier(int k, int d);  // zero-initialized, throws on k < 2 or d < 1

  double* row(int k) { return weights.data() + static_cast<std::size_t>(k) * dim; }
  const double* row(int k) const {
    return weights.data() + static_cast<std::size_t>(k) * dim;
  }
};

double dot(const double* a, const double* b, int n);

// logits[k] = w_k . f; throws on dimension mismatch.
Logits classify(const LinearClassifier& clf, const FeatureVector& f);

// Max-shifted softmax; stable for any finite logits.
ProbVector softmax(const Logits& logits);

// Indices of the largest and second-largest entry; ties broken by the lower
// index, so the result is deterministic. Throws if the vector has fewer than
// two entries.
std::pair<int, int> top2(const std::vector<double>& v);

}  // namespace sdm
