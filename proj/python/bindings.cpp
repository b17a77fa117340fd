#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sdm/config.hpp"
#include "sdm/loop.hpp"
#include "sdm/verify.hpp"

namespace py = pybind11;
using namespace sdm;

namespace {

LinearClassifier make_classifier(int k, int d,
                                 const std::vector<std::vector<double>>& rows) {
  LinearClassifier clf(k, d);
  if (!rows.empty()) {
    if (static_cast<int>(rows.size()) != k) {
      throw std::invalid_argument("weights: expected K rows");
    }
    for (int i = 0; i < k; ++i) {
      if (static_cast<int>(rows[i].size()) != d) {
        throw std::invalid_argument("weights: expected D columns per row");
      }
      for (int j = 0; j < d; ++j) clf.row(i)[j] = rows[i][j];
    }
  }
  return clf;
}

std::vector<std::vector<double>> classifier_rows(const LinearClassifier& clf) {
  std::vector<std::vector<double>> rows(clf.num_classes);
  for (int i = 0; i < clf.num_classes; ++i) {
    rows[i].assign(clf.row(i), clf.row(i) + clf.dim);
  }
  return rows;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "margin-based active domain adaptation toolkit (C++ core)";

  py::class_<Sample>(m, "Sample")
      .def(py::init([](FeatureVector f, int label) {
             return Sample{std::move(f), label};
           }),
           py::arg("f"), py::arg("label"))
      .def_readwrite("f", &Sample::f)
      .def_readwrite("label", &Sample::label);

  py::class_<LinearClassifier>(m, "LinearClassifier")
      .def(py::init(&make_classifier), py::arg("num_classes"), py::arg("dim"),
           py::arg("weights") = std::vector<std::vector<double>>{})
      .def_property_readonly("num_classes",
                             [](const LinearClassifier& c) { return c.num_classes; })
      .def_property_readonly("dim", [](const LinearClassifier& c) { return c.dim; })
      .def_property_readonly("weights", &classifier_rows);

  m.def("classify", &classify);
  m.def("softmax", &softmax);
  m.def("top2", [](const std::vector<double>& v) { return top2(v); });

  m.def("margin_loss", &margin_loss, py::arg("logits"), py::arg("y"),
        py::arg("m") = 1.0);
  m.def("margin_loss_grad_logits", &margin_loss_grad_logits, py::arg("logits"),
        py::arg("y"), py::arg("m") = 1.0);
  m.def("margin_loss_grad_features", &margin_loss_grad_features, py::arg("f"),
        py::arg("clf"), py::arg("y"), py::arg("m") = 1.0);
  m.def("dynamic_margin_loss", &dynamic_margin_loss, py::arg("logits"),
        py::arg("y"), py::arg("m") = 1.0);
  m.def("dynamic_margin_loss_grad_logits", &dynamic_margin_loss_grad_logits,
        py::arg("logits"), py::arg("y"), py::arg("m") = 1.0);
  m.def("cross_entropy", &cross_entropy);
  m.def("cross_entropy_grad_logits", &cross_entropy_grad_logits);

  m.def("q_margin", &q_margin);
  m.def("q_entropy", &q_entropy);
  m.def("q_confidence", &q_confidence);
  m.def("q_random", &q_random);
  m.def("grad_f_query", &grad_f_query);
  m.def("estimated_loss_grad", &estimated_loss_grad, py::arg("f"), py::arg("clf"),
        py::arg("probs"), py::arg("m") = 1.0);
  m.def("q_sdm_g", &q_sdm_g, py::arg("f"), py::arg("clf"), py::arg("m") = 1.0,
        py::arg("lambda_") = 0.01);

  py::class_<Prop1Report>(m, "Prop1Report")
      .def_readonly("trials", &Prop1Report::trials)
      .def_readonly("max_closed_form_error", &Prop1Report::max_closed_form_error)
      .def_readonly("monotonicity_violations", &Prop1Report::monotonicity_violations)
      .def_readonly("derivative_sign_violations",
                    &Prop1Report::derivative_sign_violations);
  m.def("verify_prop1", &verify_prop1, py::arg("trials") = 200, py::arg("dim") = 8,
        py::arg("batch_size") = 12, py::arg("eta") = 0.01, py::arg("m") = 1.0,
        py::arg("seed") = 1);

  py::class_<SyntheticConfig>(m, "SyntheticConfig")
      .def(py::init<>())
      .def_readwrite("num_classes", &SyntheticConfig::num_classes)
      .def_readwrite("dim", &SyntheticConfig::dim)
      .def_readwrite("per_class_source", &SyntheticConfig::per_class_source)
      .def_readwrite("per_class_target", &SyntheticConfig::per_class_target)
      .def_readwrite("per_class_test", &SyntheticConfig::per_class_test)
      .def_readwrite("cluster_std", &SyntheticConfig::cluster_std)
      .def_readwrite("shift_magnitude", &SyntheticConfig::shift_magnitude)
      .def_readwrite("rotation_angle", &SyntheticConfig::rotation_angle)
      .def_readwrite("seed", &SyntheticConfig::seed);

  py::class_<DomainDataset>(m, "DomainDataset")
      .def_property_readonly("num_classes", &DomainDataset::num_classes)
      .def_property_readonly("dim", &DomainDataset::dim)
      .def_property_readonly("target_pool_size", &DomainDataset::target_pool_size)
      .def_property_readonly("unlabeled_count", &DomainDataset::unlabeled_count)
      .def("is_annotated", &DomainDataset::is_annotated)
      .def("oracle_annotate", &DomainDataset::oracle_annotate)
      .def("fingerprint", &DomainDataset::fingerprint)
      .def("write_feature_csv",
           [](const DomainDataset& d, const std::string& path) {
             d.write_feature_csv(path);
           });
  m.def("generate_shifted_gaussians", &generate_shifted_gaussians);
  m.def("load_feature_csv", &load_feature_csv);

  py::enum_<LossKind>(m, "LossKind")
      .value("MARGIN", LossKind::kMargin)
      .value("DYNAMIC_MARGIN", LossKind::kDynamicMargin)
      .value("CROSS_ENTROPY", LossKind::kCrossEntropy);
  py::enum_<Strategy>(m, "Strategy")
      .value("RANDOM", Strategy::kRandom)
      .value("ENTROPY", Strategy::kEntropy)
      .value("CONFIDENCE", Strategy::kConfidence)
      .value("MARGIN", Strategy::kMargin)
      .value("SDM_G", Strategy::kSdmG);

  py::class_<ExperimentConfig>(m, "ExperimentConfig")
      .def(py::init<>())
      .def_readwrite("loss", &ExperimentConfig::loss)
      .def_readwrite("ce_weight", &ExperimentConfig::ce_weight)
      .def_readwrite("m", &ExperimentConfig::m)
      .def_readwrite("lambda_", &ExperimentConfig::lambda)
      .def_readwrite("lr", &ExperimentConfig::lr)
      .def_readwrite("batch_size", &ExperimentConfig::batch_size)
      .def_readwrite("initial_epochs", &ExperimentConfig::initial_epochs)
      .def_readwrite("epochs_between_samplings",
                     &ExperimentConfig::epochs_between_samplings)
      .def_readwrite("budget_fraction", &ExperimentConfig::budget_fraction)
      .def_readwrite("step_fraction", &ExperimentConfig::step_fraction)
      .def_readwrite("strategy", &ExperimentConfig::strategy)
      .def_readwrite("mean_reduction", &ExperimentConfig::mean_reduction)
      .def_readwrite("random_init", &ExperimentConfig::random_init)
      .def_readwrite("seed", &ExperimentConfig::seed);

  py::class_<RoundMetrics>(m, "RoundMetrics")
      .def_readonly("round_index", &RoundMetrics::round_index)
      .def_readonly("labeled_target_count", &RoundMetrics::labeled_target_count)
      .def_readonly("target_test_accuracy", &RoundMetrics::target_test_accuracy)
      .def_readonly("source_margin_fraction", &RoundMetrics::source_margin_fraction)
      .def_readonly("query_wall_time_s", &RoundMetrics::query_wall_time_s)
      .def_readonly("selected_indices", &RoundMetrics::selected_indices);

  m.def("active_learning_loop",
        [](const ExperimentConfig& cfg, DomainDataset& dataset) {
          return active_learning_loop(cfg, dataset).rounds;
        });
  m.def("evaluate_accuracy",
        [](const LinearClassifier& clf, const std::vector<Sample>& set) {
          return evaluate_accuracy(clf, set);
        });

#ifdef SDM_VERSION
  m.attr("__version__") = SDM_VERSION;
#else
  m.attr("__version__") = "dev";
#endif
}
