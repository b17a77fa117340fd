#include "sdm/losses.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace sdm {

namespace {

void check_label(const Logits& logits, int y) {
  if (y < 0 || y >= static_cast<int>(logits.size())) {
    throw std::invalid_argument("loss: label " + std::to_string(y) +
                                " out of range for K=" + std::to_string(logits.size()));
  }
}

void check_margin(double m) {
  if (!(m > 0.0) || !std::isfinite(m)) {
    throw std::invalid_argument("loss: margin must be finite and positive");
  }
}

}  // namespace

double margin_loss(const Logits& logits, int y, double m) {
  check_label(logits, y);
  check_margin(m);
  double loss = 0.0;
  for (int i = 0; i < static_cast<int>(logits.size()); ++i) {
    if (i == y) continue;
    const double h = m - logits[y] + logits[i];
    if (h > 0.0) loss += h;
  }
  return loss;
}

std::vector<double> margin_loss_grad_logits(const Logits& logits, int y, double m) {
  check_label(logits, y);
  check_margin(m);
  std::vector<double> g(logits.size(), 0.0);
  for (int i = 0; i < static_cast<int>(logits.size()); ++i) {
    if (i == y) continue;
    if (m - logits[y] + logits[i] > 0.0) {
      g[i] = 1.0;
      g[y] -= 1.0;
    }
  }
  return g;
}

std::vector<double> margin_loss_grad_features(const FeatureVector& f,
                                              const LinearClassifier& clf,
                                              int y, double m) {
  if (y < 0 || y >= clf.num_classes) {
    throw std::invalid_argument("margin_loss_grad_features: label out of range");
  }
  check_margin(m);
  const Logits logits = classify(clf, f);  // checks dimensions
  std::vector<double> g(clf.dim, 0.0);
  const double* wy = clf.row(y);
  for (int i = 0; i < clf.num_classes; ++i) {
    if (i == y) continue;
    if (m - logits[y] + logits[i] > 0.0) {
      const double* wi = clf.row(i);
      for (int d = 0; d < clf.dim; ++d) g[d] += wi[d] - wy[d];
    }
  }
  return g;
}

double dynamic_margin_loss(const Logits& logits, int y, double m) {
  check_label(logits, y);
  check_margin(m);
  double loss = -logits[y];
  for (int i = 0; i < static_cast<int>(logits.size()); ++i) {
    if (i == y) continue;
    const double h = m - logits[y] + logits[i];
    if (h > 0.0) {
      const double alpha = 1.0 - (logits[y] - logits[i]) / m;
      loss += alpha * h;
    }
  }
  return loss;
}

std::vector<double> dynamic_margin_loss_grad_logits(const Logits& logits, int y,
                                                    double m) {
  check_label(logits, y);
  check_margin(m);
  std::vector<double> g(logits.size(), 0.0);
  g[y] = -1.0;  // max-logit regularizer
  for (int i = 0; i < static_cast<int>(logits.size()); ++i) {
    if (i == y) continue;
    if (m - logits[y] + logits[i] > 0.0) {
      const double alpha = 1.0 - (logits[y] - logits[i]) / m;
      g[i] += alpha;
      g[y] -= alpha;
    }
  }
  return g;
}

double cross_entropy(const ProbVector& probs, int y) {
  check_label(probs, y);
  const double p = probs[y] < 1e-12 ? 1e-12 : probs[y];
  return -std::log(p);
}

std::vector<double> cross_entropy_grad_logits(const ProbVector& probs, int y) {
  check_label(probs, y);
  std::vector<double> g(probs.begin(), probs.end());
  g[y] -= 1.0;
  return g;
}

std::vector<double> loss_grad_logits(const Logits& logits, int y, LossKind kind,
                                     double m) {
  switch (kind) {
    case LossKind::kMargin:
      return margin_loss_grad_logits(logits, y, m);
    case LossKind::kDynamicMargin:
      return dynamic_margin_loss_grad_logits(logits, y, m);
    case LossKind::kCrossEntropy:
      return cross_entropy_grad_logits(softmax(logits), y);
  }
  throw std::invalid_argument("loss_grad_logits: unknown loss kind");
}

double loss_value(const Logits& logits, int y, LossKind kind, double m) {
  switch (kind) {
    case LossKind::kMargin:
      return margin_loss(logits, y, m);
    case LossKind::kDynamicMargin:
      return dynamic_margin_loss(logits, y, m);
    case LossKind::kCrossEntropy:
      return cross_entropy(softmax(logits), y);
  }
  throw std::invalid_argument("loss_value: unknown loss kind");
}

std::vector<double> weight_gradient(std::span<const Sample> batch,
                                    const LinearClassifier& clf, LossKind kind,
                                    double m) {
  if (batch.empty()) throw std::invalid_argument("weight_gradient: empty batch");
  std::vector<double> grad(static_cast<std::size_t>(clf.num_classes) * clf.dim, 0.0);
  for (const Sample& s : batch) {
    const Logits logits = classify(clf, s.f);
    const std::vector<double> gl = loss_grad_logits(logits, s.label, kind, m);
    for (int k = 0; k < clf.num_classes; ++k) {
      if (gl[k] == 0.0) continue;
      double* row = grad.data() + static_cast<std::size_t>(k) * clf.dim;
      for (int d = 0; d < clf.dim; ++d) row[d] += gl[k] * s.f[d];
    }
  }
  return grad;
}

}  // namespace sdm
