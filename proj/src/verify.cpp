#include "sdm/verify.hpp"

#include <algorithm>
#include <cmath>

#include "sdm/losses.hpp"
#include "sdm/query.hpp"
#include "sdm/rng.hpp"

namespace sdm {

namespace {

constexpr double kFdStep = 1e-5;
constexpr double kKinkClearance = 1e-3;  // reject instances near hinge kinks

double rel_error(double analytic, double fd) {
  const double denom = std::max({std::abs(analytic), std::abs(fd), 1e-3});
  return std::abs(analytic - fd) / denom;
}

// A random instance is usable only when every hinge argument is clear of
// its kink, so the central difference straddles a smooth region.
bool away_from_kinks(const Logits& logits, int y, double m) {
  for (int i = 0; i < static_cast<int>(logits.size()); ++i) {
    if (i == y) continue;
    if (std::abs(m - logits[y] + logits[i]) < kKinkClearance) return false;
  }
  return true;
}

Logits random_logits(Rng& rng, int k, double scale) {
  Logits l(k);
  for (double& v : l) v = scale * rng.next_normal();
  return l;
}

LinearClassifier random_classifier(Rng& rng, int k, int d, double scale) {
  LinearClassifier clf(k, d);
  for (double& w : clf.weights) w = scale * rng.next_normal();
  return clf;
}

FeatureVector random_feature(Rng& rng, int d) {
  FeatureVector f(d);
  for (double& v : f) v = rng.next_normal();
  return f;
}

void record(GradientCheck& check, double err) {
  ++check.instances;
  check.max_rel_error = std::max(check.max_rel_error, err);
  if (err > check.tolerance) ++check.failures;
}

}  // namespace

double central_diff(const std::function<double(double)>& f, double x0) {
  return (f(x0 + kFdStep) - f(x0 - kFdStep)) / (2.0 * kFdStep);
}

VerifyReport run_verify(const VerifyOptions& options) {
  VerifyReport report;
  report.options = options;

  const int trials = options.trials;
  const double m = options.m;
  Rng root(options.seed);

  // --- margin loss gradient w.r.t. logits -------------------------------
  {
    GradientCheck check;
    check.name = "margin_loss_grad_logits";
    Rng rng = root.branch(101);
    const int k = 8;
    while (check.instances < trials) {
      Logits l = random_logits(rng, k, 2.0);
      const int y = static_cast<int>(rng.next_index(k));
      if (!away_from_kinks(l, y, m)) continue;
      const std::vector<double> g = margin_loss_grad_logits(l, y, m);
      double worst = 0.0;
      for (int i = 0; i < k; ++i) {
        const double fd = central_diff(
            [&](double xi) {
              Logits pert = l;
              pert[i] = xi;
              return margin_loss(pert, y, m);
            },
            l[i]);
        worst = std::max(worst, rel_error(g[i], fd));
      }
      record(check, worst);
    }
    report.gradient_checks.push_back(check);
  }

  // --- margin loss gradient w.r.t. features -----------------------------
  {
    GradientCheck check;
    check.name = "margin_loss_grad_features";
    Rng rng = root.branch(102);
    const int k = 5, d = 12;
    while (check.instances < trials) {
      const LinearClassifier clf = random_classifier(rng, k, d, 0.7);
      const FeatureVector f = random_feature(rng, d);
      const int y = static_cast<int>(rng.next_index(k));
      if (!away_from_kinks(classify(clf, f), y, m)) continue;
      const std::vector<double> g = margin_loss_grad_features(f, clf, y, m);
      double worst = 0.0;
      for (int j = 0; j < d; ++j) {
        const double fd = central_diff(
            [&](double xj) {
              FeatureVector pert = f;
              pert[j] = xj;
              return margin_loss(classify(clf, pert), y, m);
            },
            f[j]);
        worst = std::max(worst, rel_error(g[j], fd));
      }
      record(check, worst);
    }
    report.gradient_checks.push_back(check);
  }

  // --- batch gradient w.r.t. weights -------------------------------------
  {
    GradientCheck check;
    check.name = "weight_gradient_margin";
    Rng rng = root.branch(103);
    const int k = 5, d = 8, batch_n = 6;
    while (check.instances < trials) {
      LinearClassifier clf = random_classifier(rng, k, d, 0.7);
      std::vector<Sample> batch;
      bool clear = true;
      for (int i = 0; i < batch_n; ++i) {
        Sample s;
        s.f = random_feature(rng, d);
        s.label = static_cast<int>(rng.next_index(k));
        clear = clear && away_from_kinks(classify(clf, s.f), s.label, m);
        batch.push_back(std::move(s));
      }
      if (!clear) continue;
      const std::vector<double> g =
          weight_gradient(batch, clf, LossKind::kMargin, m);
      auto batch_loss = [&](const LinearClassifier& c) {
        double total = 0.0;
        for (const Sample& s : batch) total += margin_loss(classify(c, s.f), s.label, m);
        return total;
      };
      double worst = 0.0;
      for (std::size_t w = 0; w < clf.weights.size(); ++w) {
        const double fd = central_diff(
            [&](double x) {
              LinearClassifier pert = clf;
              pert.weights[w] = x;
              return batch_loss(pert);
            },
            clf.weights[w]);
        worst = std::max(worst, rel_error(g[w], fd));
      }
      record(check, worst);
    }
    report.gradient_checks.push_back(check);
  }

  // --- dynamic margin detached surrogate ---------------------------------
  // alpha is frozen at the base point; the finite difference runs on the
  // surrogate with those constants.
  {
    GradientCheck check;
    check.name = "dynamic_margin_grad_logits_detached";
    Rng rng = root.branch(104);
    const int k = 8;
    while (check.instances < trials) {
      Logits l = random_logits(rng, k, 2.0);
      const int y = static_cast<int>(rng.next_index(k));
      if (!away_from_kinks(l, y, m)) continue;
      std::vector<double> alpha(k, 0.0);
      for (int i = 0; i < k; ++i) {
        if (i != y) alpha[i] = 1.0 - (l[y] - l[i]) / m;
      }
      auto surrogate = [&](const Logits& pert) {
        double v = -pert[y];
        for (int i = 0; i < k; ++i) {
          if (i == y) continue;
          const double h = m - pert[y] + pert[i];
          if (h > 0.0) v += alpha[i] * h;
        }
        return v;
      };
      const std::vector<double> g = dynamic_margin_loss_grad_logits(l, y, m);
      double worst = 0.0;
      for (int i = 0; i < k; ++i) {
        const double fd = central_diff(
            [&](double xi) {
              Logits pert = l;
              pert[i] = xi;
              return surrogate(pert);
            },
            l[i]);
        worst = std::max(worst, rel_error(g[i], fd));
      }
      record(check, worst);
    }
    report.gradient_checks.push_back(check);
  }

  // --- cross entropy ------------------------------------------------------
  {
    GradientCheck check;
    check.name = "cross_entropy_grad_logits";
    Rng rng = root.branch(105);
    const int k = 6;
    while (check.instances < trials) {
      Logits l = random_logits(rng, k, 2.0);
      const int y = static_cast<int>(rng.next_index(k));
      const std::vector<double> g = cross_entropy_grad_logits(softmax(l), y);
      double worst = 0.0;
      for (int i = 0; i < k; ++i) {
        const double fd = central_diff(
            [&](double xi) {
              Logits pert = l;
              pert[i] = xi;
              return cross_entropy(softmax(pert), y);
            },
            l[i]);
        worst = std::max(worst, rel_error(g[i], fd));
      }
      record(check, worst);
    }
    report.gradient_checks.push_back(check);
  }

  // --- query-score feature gradient --------------------------------------
  // Instances are kept only where the top-2 indices are stable: every
  // pairwise logit separation around the 1*/2*/3rd boundary exceeds the
  // kink clearance, so the FD perturbation cannot reorder them.
  {
    GradientCheck check;
    check.name = "grad_f_query";
    Rng rng = root.branch(106);
    const int k = 6, d = 10;
    while (check.instances < trials) {
      const LinearClassifier clf = random_classifier(rng, k, d, 0.5);
      const FeatureVector f = random_feature(rng, d);
      const Logits logits = classify(clf, f);
      Logits sorted = logits;
      std::sort(sorted.begin(), sorted.end(), std::greater<double>());
      if (sorted[0] - sorted[1] < kKinkClearance ||
          sorted[1] - sorted[2] < kKinkClearance) {
        continue;
      }
      const ProbVector probs = softmax(logits);
      const std::vector<double> g = grad_f_query(f, clf, probs);
      double worst = 0.0;
      for (int j = 0; j < d; ++j) {
        const double fd = central_diff(
            [&](double xj) {
              FeatureVector pert = f;
              pert[j] = xj;
              return q_margin(softmax(classify(clf, pert)));
            },
            f[j]);
        worst = std::max(worst, rel_error(g[j], fd));
      }
      record(check, worst);
    }
    report.gradient_checks.push_back(check);
  }

  // --- dynamic-margin value identity --------------------------------------
  // sum_i alpha_i hinge_i - l_y == sum_i hinge_i^2 / m - l_y on all inputs.
  {
    LossIdentityCheck check;
    Rng rng = root.branch(107);
    const int instances = 10000;
    for (int t = 0; t < instances; ++t) {
      const int k = 2 + static_cast<int>(rng.next_index(9));
      Logits l = random_logits(rng, k, 2.0);
      const int y = static_cast<int>(rng.next_index(k));
      const double mm = 0.5 + 1.5 * rng.next_double();
      const double value = dynamic_margin_loss(l, y, mm);
      double expected = -l[y];
      for (int i = 0; i < k; ++i) {
        if (i == y) continue;
        const double h = mm - l[y] + l[i];
        if (h > 0.0) expected += h * h / mm;
      }
      const double err = std::abs(value - expected);
      ++check.instances;
      check.max_abs_error = std::max(check.max_abs_error, err);
      if (err > check.tolerance) ++check.failures;
    }
    report.loss_identity = check;
  }

  std::uint64_t prop1_seed_state = options.seed ^ 0x5851f42d4c957f2dULL;
  report.prop1 =
      verify_prop1(trials, 8, 12, options.eta, m, splitmix64(prop1_seed_state));
  return report;
}

bool VerifyReport::all_pass() const {
  if (prop1.max_closed_form_error > 1e-9 || prop1.monotonicity_violations != 0 ||
      prop1.derivative_sign_violations != 0) {
    return false;
  }
  for (const GradientCheck& c : gradient_checks) {
    if (!c.pass()) return false;
  }
  return loss_identity.pass();
}

}  // namespace sdm
