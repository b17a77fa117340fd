#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sdm/core.hpp"

namespace sdm {

// Binary linear setting used by the monotonicity and divergence checks:
// logits are (w_plus . x, w_minus . x).
struct BinaryLinearModel {
  std::vector<double> w_plus;
  std::vector<double> w_minus;

  int dim() const { return static_cast<int>(w_plus.size()); }
};

struct TrainingBatch {
  std::vector<FeatureVector> positives;
  std::vector<FeatureVector> negatives;
};

struct Prop1Report {
  int trials = 0;
  double max_closed_form_error = 0.0;
  int monotonicity_violations = 0;
  int derivative_sign_violations = 0;
};

// Signed local similarity indicator:
//   sum_{x_p in S+} delta(m > w_+.x_p - w_-.x_p) x_p.x
// - sum_{x_n in S-} delta(m > w_-.x_n - w_+.x_n) x_n.x
// Only samples still inside the margin (the "hard" ones) contribute.
double similarity_indicator(const FeatureVector& x, const TrainingBatch& batch,
                            const BinaryLinearModel& model, double m);

// Batch margin loss of the binary model (sum over both sets).
double binary_batch_loss(const BinaryLinearModel& model,
                         const TrainingBatch& batch, double m);

// One full-batch gradient-descent step with the delta-gated gradients:
//   w_+' = w_+ - eta * (sum_hard(S-) x_n - sum_hard(S+) x_p), mirrored for w_-.
BinaryLinearModel one_step_update(const BinaryLinearModel& model,
                                  const TrainingBatch& batch, double eta,
                                  double m);

// Margin-sampling score of x under the binary model (direct route:
// softmax of the two logits).
double binary_query(const BinaryLinearModel& model, const FeatureVector& x);

// Closed form of the post-update score as a function of the indicator:
// on the branch where the updated model favors the positive class,
//   Q~(I) = 2 e^{w_-.x} e^{-eta I} / (e^{w_+.x} e^{eta I} + e^{w_-.x} e^{-eta I})
// and mirrored on the other branch. Evaluated in the log domain; the branch
// is chosen by the sign of (w_+ - w_-).x after the update.
double closed_form_post_query(double indicator, const FeatureVector& x,
                              const BinaryLinearModel& model, double eta);

// Randomized verification of the monotonic-in-I claim. Each trial checks
// (a) closed form vs. direct simulation, (b) strict monotonicity along an
// indicator sweep that varies I while every delta gate stays fixed, and
// (c) the sign of the analytic derivative eta * ((1 - Q~)^2 - 1) on the
// positive branch. Violations are counted, never dropped.
Prop1Report verify_prop1(int trials, int dim, int batch_size, double eta,
                         double m, std::uint64_t seed);

// Fraction of samples with |w_+.x - w_-.x| >= m: the empirical inner
// quantity of the divergence bound at the given weights (no sup is taken).
double margin_divergence_fraction(std::span<const FeatureVector> features,
                                  const BinaryLinearModel& model, double m);

// Restriction of a K-class classifier to rows 0 and 1 (binary runs only;
// throws unless K == 2).
BinaryLinearModel binary_restriction(const LinearClassifier& clf);

}  // namespace sdm
