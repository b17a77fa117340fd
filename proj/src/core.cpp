#include "sdm/core.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace sdm {

LinearClassifier::LinearClassifier(int k, int d)
    : num_classes(k), dim(d), weights(static_cast<std::size_t>(k) * d, 0.0) {
  if (k < 2) throw std::invalid_argument("LinearClassifier: num_classes must be >= 2");
  if (d < 1) throw std::invalid_argument("LinearClassifier: dim must be >= 1");
}

double dot(const double* a, const double* b, int n) {
  double acc = 0.0;
  for (int i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

Logits classify(const LinearClassifier& clf, const FeatureVector& f) {
  if (static_cast<int>(f.size()) != clf.dim) {
    throw std::invalid_argument("classify: feature dim " + std::to_string(f.size()) +
                                " != classifier dim " + std::to_string(clf.dim));
  }
  Logits out(clf.num_classes);
  for (int k = 0; k < clf.num_classes; ++k) out[k] = dot(clf.row(k), f.data(), clf.dim);
  return out;
}

ProbVector softmax(const Logits& logits) {
  if (logits.empty()) throw std::invalid_argument("softmax: empty logits");
  const double shift = *std::max_element(logits.begin(), logits.end());
  ProbVector p(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - shift);
    sum += p[i];
  }
  for (double& v : p) v /= sum;
  return p;
}

std::pair<int, int> top2(const std::vector<double>& v) {
  if (v.size() < 2) throw std::invalid_argument("top2: need at least two entries");
  int first = 0;
  int second = 1;
  if (v[1] > v[0]) std::swap(first, second);
  for (int i = 2; i < static_cast<int>(v.size()); ++i) {
    if (v[i] > v[first]) {
      second = first;
      first = i;
    } else if (v[i] > v[second]) {
      second = i;
    }
  }
  return {first, second};
}

}  // namespace sdm
