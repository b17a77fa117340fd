#include "sdm/theory.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sdm/query.hpp"
#include "sdm/rng.hpp"

namespace sdm {

namespace {

void check_dims(const FeatureVector& x, const BinaryLinearModel& model,
                const char* where) {
  if (x.size() != model.w_plus.size() || model.w_plus.size() != model.w_minus.size()) {
    throw std::invalid_argument(std::string(where) + ": dimension mismatch");
  }
}

bool hard_positive(const BinaryLinearModel& m_, const FeatureVector& x, double m) {
  const int d = static_cast<int>(x.size());
  return m > dot(m_.w_plus.data(), x.data(), d) - dot(m_.w_minus.data(), x.data(), d);
}

bool hard_negative(const BinaryLinearModel& m_, const FeatureVector& x, double m) {
  const int d = static_cast<int>(x.size());
  return m > dot(m_.w_minus.data(), x.data(), d) - dot(m_.w_plus.data(), x.data(), d);
}

}  // namespace

double similarity_indicator(const FeatureVector& x, const TrainingBatch& batch,
                            const BinaryLinearModel& model, double m) {
  check_dims(x, model, "similarity_indicator");
  const int d = static_cast<int>(x.size());
  double indicator = 0.0;
  for (const FeatureVector& xp : batch.positives) {
    if (xp.size() != x.size()) {
      throw std::invalid_argument("similarity_indicator: batch dimension mismatch");
    }
    if (hard_positive(model, xp, m)) indicator += dot(xp.data(), x.data(), d);
  }
  for (const FeatureVector& xn : batch.negatives) {
    if (xn.size() != x.size()) {
      throw std::invalid_argument("similarity_indicator: batch dimension mismatch");
    }
    if (hard_negative(model, xn, m)) indicator -= dot(xn.data(), x.data(), d);
  }
  return indicator;
}

double binary_batch_loss(const BinaryLinearModel& model, const TrainingBatch& batch,
                         double m) {
  const int d = model.dim();
  double loss = 0.0;
  for (const FeatureVector& xp : batch.positives) {
    const double h = m - dot(model.w_plus.data(), xp.data(), d) +
                     dot(model.w_minus.data(), xp.data(), d);
    if (h > 0.0) loss += h;
  }
  for (const FeatureVector& xn : batch.negatives) {
    const double h = m + dot(model.w_plus.data(), xn.data(), d) -
                     dot(model.w_minus.data(), xn.data(), d);
    if (h > 0.0) loss += h;
  }
  return loss;
}

BinaryLinearModel one_step_update(const BinaryLinearModel& model,
                                  const TrainingBatch& batch, double eta,
                                  double m) {
  if (!(eta > 0.0)) throw std::invalid_argument("one_step_update: eta must be > 0");
  const int d = model.dim();
  // grad w_+ = sum_hard(S-) x_n - sum_hard(S+) x_p; w_- mirrored.
  std::vector<double> grad_plus(d, 0.0);
  for (const FeatureVector& xp : batch.positives) {
    if (hard_positive(model, xp, m)) {
      for (int j = 0; j < d; ++j) grad_plus[j] -= xp[j];
    }
  }
  for (const FeatureVector& xn : batch.negatives) {
    if (hard_negative(model, xn, m)) {
      for (int j = 0; j < d; ++j) grad_plus[j] += xn[j];
    }
  }
  BinaryLinearModel out = model;
  for (int j = 0; j < d; ++j) {
    out.w_plus[j] = model.w_plus[j] - eta * grad_plus[j];
    out.w_minus[j] = model.w_minus[j] + eta * grad_plus[j];
  }
  return out;
}

double binary_query(const BinaryLinearModel& model, const FeatureVector& x) {
  check_dims(x, model, "binary_query");
  const int d = model.dim();
  const Logits logits = {dot(model.w_plus.data(), x.data(), d),
                         dot(model.w_minus.data(), x.data(), d)};
  return q_margin(softmax(logits));
}

double closed_form_post_query(double indicator, const FeatureVector& x,
                              const BinaryLinearModel& model, double eta) {
  check_dims(x, model, "closed_form_post_query");
  const int d = model.dim();
  // Post-update logit gap; the branch of the closed form is its sign.
  const double gap_pre = dot(model.w_plus.data(), x.data(), d) -
                         dot(model.w_minus.data(), x.data(), d);
  const double gap_post = gap_pre + 2.0 * eta * indicator;
  // Positive branch: Q~ = 2 e^{-gap} / (1 + e^{-gap}); mirrored otherwise.
  const double t = std::exp(-std::abs(gap_post));
  return 2.0 * t / (1.0 + t);
}

Prop1Report verify_prop1(int trials, int dim, int batch_size, double eta,
                         double m, std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("verify_prop1: trials must be >= 1");
  if (!(eta > 0.0)) throw std::invalid_argument("verify_prop1: eta must be > 0");
  if (!(m > 0.0)) throw std::invalid_argument("verify_prop1: m must be > 0");
  if (dim < 2) throw std::invalid_argument("verify_prop1: dim must be >= 2");

  Prop1Report report;
  report.trials = trials;
  Rng root(seed);
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(dim));

  for (int t = 0; t < trials; ++t) {
    Rng rng = root.branch(static_cast<std::uint64_t>(t));

    BinaryLinearModel model;
    model.w_plus.resize(dim);
    model.w_minus.resize(dim);
    for (int j = 0; j < dim; ++j) model.w_plus[j] = rng.next_normal() * inv_sqrt_d;
    for (int j = 0; j < dim; ++j) model.w_minus[j] = rng.next_normal() * inv_sqrt_d;

    TrainingBatch batch;
    for (int i = 0; i < batch_size; ++i) {
      FeatureVector f(dim);
      for (int j = 0; j < dim; ++j) f[j] = rng.next_normal();
      if (rng.next_u64() & 1ULL) {
        batch.positives.push_back(std::move(f));
      } else {
        batch.negatives.push_back(std::move(f));
      }
    }

    FeatureVector probe(dim);
    for (int j = 0; j < dim; ++j) probe[j] = rng.next_normal();

    // (a) closed form against the direct post-update simulation.
    const double indicator = similarity_indicator(probe, batch, model, m);
    const double direct = binary_query(one_step_update(model, batch, eta, m), probe);
    const double closed = closed_form_post_query(indicator, probe, model, eta);
    report.max_closed_form_error =
        std::max(report.max_closed_form_error, std::abs(direct - closed));

    // (b) sweep the indicator in isolation. A controlled positive sample
    // x_c = s * v with v orthogonal to (w_+ - w_-) keeps every gate fixed
    // (its own gap stays 0 < m) while x_c . probe takes any prescribed
    // value, so only I varies.
    std::vector<double> wdiff(dim);
    for (int j = 0; j < dim; ++j) wdiff[j] = model.w_plus[j] - model.w_minus[j];
    const double wnorm2 = dot(wdiff.data(), wdiff.data(), dim);
    if (wnorm2 < 1e-12) continue;
    std::vector<double> v(dim);
    const double proj = dot(wdiff.data(), probe.data(), dim) / wnorm2;
    for (int j = 0; j < dim; ++j) v[j] = probe[j] - proj * wdiff[j];
    const double vx = dot(v.data(), probe.data(), dim);
    const double probe_norm2 = dot(probe.data(), probe.data(), dim);
    if (vx < 1e-6 * probe_norm2) continue;  // probe almost parallel to w_+ - w_-

    const double gap_pre = dot(wdiff.data(), probe.data(), dim);
    // Target post-update gaps, both branches, |gap| <= 12 so the closed
    // form stays far from underflow.
    const double gap_grid[] = {-12, -9, -6, -3, -1, 1, 3, 6, 9, 12};
    struct SweepPoint {
      double indicator;
      double q_closed;
      double gap_post;
    };
    std::vector<SweepPoint> points;
    for (const double gap_target : gap_grid) {
      const double i_target = (gap_target - gap_pre) / (2.0 * eta);
      const double scale = (i_target - indicator) / vx;
      TrainingBatch swept = batch;
      FeatureVector controlled(dim);
      for (int j = 0; j < dim; ++j) controlled[j] = scale * v[j];
      swept.positives.push_back(std::move(controlled));

      const double i_actual = similarity_indicator(probe, swept, model, m);
      const double q_direct =
          binary_query(one_step_update(model, swept, eta, m), probe);
      const double q_closed = closed_form_post_query(i_actual, probe, model, eta);
      report.max_closed_form_error =
          std::max(report.max_closed_form_error, std::abs(q_direct - q_closed));
      points.push_back({i_actual, q_closed,
                        gap_pre + 2.0 * eta * i_actual});
    }
    std::sort(points.begin(), points.end(),
              [](const SweepPoint& a, const SweepPoint& b) {
                return a.indicator < b.indicator;
              });
    for (std::size_t i = 1; i < points.size(); ++i) {
      const SweepPoint& prev = points[i - 1];
      const SweepPoint& cur = points[i];
      if (prev.gap_post > 0.0 && cur.gap_post > 0.0) {
        // positive branch: strictly decreasing in I
        if (cur.q_closed - prev.q_closed > 1e-12) ++report.monotonicity_violations;
      } else if (prev.gap_post < 0.0 && cur.gap_post < 0.0) {
        // mirrored branch: strictly increasing in I
        if (prev.q_closed - cur.q_closed > 1e-12) ++report.monotonicity_violations;
      }
    }
    // (c) analytic derivative on the positive branch.
    for (const SweepPoint& p : points) {
      if (p.gap_post > 0.0) {
        const double q = p.q_closed;
        const double deriv = eta * ((1.0 - q) * (1.0 - q) - 1.0);
        if (!(deriv < 0.0)) ++report.derivative_sign_violations;
      }
    }
  }
  return report;
}

double margin_divergence_fraction(std::span<const FeatureVector> features,
                                  const BinaryLinearModel& model, double m) {
  if (features.empty()) {
    throw std::invalid_argument("margin_divergence_fraction: empty feature set");
  }
  const int d = model.dim();
  int count = 0;
  for (const FeatureVector& x : features) {
    if (static_cast<int>(x.size()) != d) {
      throw std::invalid_argument("margin_divergence_fraction: dimension mismatch");
    }
    const double gap = dot(model.w_plus.data(), x.data(), d) -
                       dot(model.w_minus.data(), x.data(), d);
    if (std::abs(gap) >= m) ++count;
  }
  return static_cast<double>(count) / static_cast<double>(features.size());
}

BinaryLinearModel binary_restriction(const LinearClassifier& clf) {
  if (clf.num_classes != 2) {
    throw std::invalid_argument("binary_restriction: classifier must have K == 2");
  }
  BinaryLinearModel model;
  model.w_plus.assign(clf.row(0), clf.row(0) + clf.dim);
  model.w_minus.assign(clf.row(1), clf.row(1) + clf.dim);
  return model;
}

}  // namespace sdm
