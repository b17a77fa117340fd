#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "sdm/theory.hpp"

namespace sdm {

// One analytic-vs-finite-difference comparison over many random non-kink
// instances. rel_error of a component pair (a, f) is |a - f| /
// max(|a|, |f|, 1e-3); an instance fails when any component exceeds the
// tolerance.
struct GradientCheck {
  std::string name;
  int instances = 0;
  double max_rel_error = 0.0;
  double tolerance = 1e-6;
  int failures = 0;

  bool pass() const { return failures == 0; }
};

struct LossIdentityCheck {
  int instances = 0;
  double max_abs_error = 0.0;
  double tolerance = 1e-12;
  int failures = 0;

  bool pass() const { return failures == 0; }
};

struct VerifyOptions {
  int trials = 200;  // per gradient check and per monotonicity trial
  std::uint64_t seed = 1;
  double eta = 0.01;
  double m = 1.0;
};

struct VerifyReport {
  VerifyOptions options;
  Prop1Report prop1;
  std::vector<GradientCheck> gradient_checks;
  LossIdentityCheck loss_identity;

  bool all_pass() const;
};

// Central finite difference, h = 1e-5.
double central_diff(const std::function<double(double)>& f, double x0);

// Runs the full property battery: the closed-form/monotonicity harness,
// every analytic gradient against central differences (margin loss w.r.t.
// logits, features and weights; the detached dynamic-margin surrogate;
// cross entropy; the query-score feature gradient), and the squared-hinge
// value identity of the dynamic loss. Nothing is skippable; the report
// lists every suite it ran.
VerifyReport run_verify(const VerifyOptions& options);

}  // namespace sdm
