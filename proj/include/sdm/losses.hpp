#pragma once

#include <span>
#include <vector>

#include "sdm/core.hpp"

namespace sdm {

enum class LossKind { kMargin, kDynamicMargin, kCrossEntropy };

// Per-class hinge: sum_{i != y} max(0, m - logits[y] + logits[i]).
// The margin width m must be finite and positive (default 1.0 everywhere).
double margin_loss(const Logits& logits, int y, double m);

// Subgradient with the strict-inequality convention: a term contributes
// only when m - logits[y] + logits[i] > 0; at the kink the contribution
// is zero.
std::vector<double> margin_loss_grad_logits(const Logits& logits, int y, double m);

// Gradient of the margin loss w.r.t. the feature:
//   sum_{i != y} delta(m > w_y.f - w_i.f) (w_i - w_y)
std::vector<double> margin_loss_grad_features(const FeatureVector& f,
                                              const LinearClassifier& clf,
                                              int y, double m);

// Dynamic variant: sum_{i != y} alpha_i * hinge_i - logits[y] with
// alpha_i = 1 - (logits[y] - logits[i]) / m. For active hinges
// alpha_i * hinge_i == hinge_i^2 / m, so the value also equals
// sum hinge^2 / m - logits[y].
double dynamic_margin_loss(const Logits& logits, int y, double m);

// Gradient of the detached surrogate: alpha is treated as a constant of the
// base point, so active terms contribute alpha_i and the max-logit term
// contributes -1 at y.
std::vector<double> dynamic_margin_loss_grad_logits(const Logits& logits, int y,
                                                    double m);

// -log(p_y) with p_y clamped at 1e-12 before the log.
double cross_entropy(const ProbVector& probs, int y);
std::vector<double> cross_entropy_grad_logits(const ProbVector& probs, int y);

// Gradient of the chosen per-sample loss w.r.t. the logit vector.
// kCrossEntropy applies softmax internally.
std::vector<double> loss_grad_logits(const Logits& logits, int y, LossKind kind,
                                     double m);

double loss_value(const Logits& logits, int y, LossKind kind, double m);

// Batch gradient w.r.t. the weight matrix: the sum over samples of
// grad_logits outer f, accumulated in batch order (deterministic). For
// K = 2 and the margin loss this reproduces the delta-gated sums over the
// positive and negative sets term for term.
std::vector<double> weight_gradient(std::span<const Sample> batch,
                                    const LinearClassifier& clf, LossKind kind,
                                    double m);

}  // namespace sdm
