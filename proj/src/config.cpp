#include "sdm/config.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "sdm/rng.hpp"

namespace sdm {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& why) {
  throw std::invalid_argument("config error at " + path + ": " + why);
}

void reject_unknown_keys(const json& obj, const std::set<std::string>& known,
                         const std::string& path) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (known.find(it.key()) == known.end()) {
      fail(path + "." + it.key(), "unknown key");
    }
  }
}

double get_number(const json& obj, const char* key, double fallback,
                  const std::string& path) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) fail(path + "." + key, "expected a number");
  return v.get<double>();
}

int get_int(const json& obj, const char* key, int fallback, const std::string& path) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer()) fail(path + "." + key, "expected an integer");
  return v.get<int>();
}

bool get_bool(const json& obj, const char* key, bool fallback,
              const std::string& path) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_boolean()) fail(path + "." + key, "expected a boolean");
  return v.get<bool>();
}

std::string get_string(const json& obj, const char* key, const std::string& fallback,
                       const std::string& path) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_string()) fail(path + "." + key, "expected a string");
  return v.get<std::string>();
}

DatasetSpec parse_dataset(const json& obj, const std::string& path) {
  if (!obj.is_object()) fail(path, "expected an object");
  DatasetSpec spec;
  const std::string kind = get_string(obj, "kind", "synthetic", path);
  if (kind == "synthetic") {
    spec.kind = DatasetSpec::Kind::kSynthetic;
    reject_unknown_keys(obj,
                        {"kind", "k", "d", "per_class_source", "per_class_target",
                         "per_class_test", "cluster_std", "shift_magnitude",
                         "rotation_angle", "seed"},
                        path);
    SyntheticConfig& s = spec.synthetic;
    s.num_classes = get_int(obj, "k", s.num_classes, path);
    s.dim = get_int(obj, "d", s.dim, path);
    s.per_class_source = get_int(obj, "per_class_source", s.per_class_source, path);
    s.per_class_target = get_int(obj, "per_class_target", s.per_class_target, path);
    s.per_class_test =
        get_int(obj, "per_class_test", s.per_class_target, path);
    s.cluster_std = get_number(obj, "cluster_std", s.cluster_std, path);
    s.shift_magnitude = get_number(obj, "shift_magnitude", s.shift_magnitude, path);
    s.rotation_angle = get_number(obj, "rotation_angle", s.rotation_angle, path);
    if (obj.contains("seed")) {
      if (!obj.at("seed").is_number_integer()) fail(path + ".seed", "expected an integer");
      s.seed = obj.at("seed").get<std::uint64_t>();
      spec.synthetic_seed_explicit = true;
    }
  } else if (kind == "csv") {
    spec.kind = DatasetSpec::Kind::kCsv;
    reject_unknown_keys(obj, {"kind", "path"}, path);
    spec.csv_path = get_string(obj, "path", "", path);
    if (spec.csv_path.empty()) fail(path + ".path", "csv dataset needs a path");
  } else {
    fail(path + ".kind", "expected \"synthetic\" or \"csv\"");
  }
  return spec;
}

}  // namespace

RunConfig parse_run_config(const json& doc) {
  if (!doc.is_object()) fail("$", "expected a JSON object");
  reject_unknown_keys(doc,
                      {"loss", "ce_weight", "m", "lambda", "lr", "batch_size",
                       "initial_epochs", "epochs_between_samplings",
                       "budget_fraction", "step_fraction", "strategy", "dataset",
                       "seed", "reduction", "random_init"},
                      "$");
  RunConfig cfg;
  ExperimentConfig& e = cfg.experiment;

  const std::string loss = get_string(doc, "loss", "margin", "$");
  if (loss == "margin") {
    e.loss = LossKind::kMargin;
  } else if (loss == "dynamic_margin") {
    e.loss = LossKind::kDynamicMargin;
  } else {
    fail("$.loss", "expected \"margin\" or \"dynamic_margin\"");
  }

  e.ce_weight = get_number(doc, "ce_weight", e.ce_weight, "$");
  e.m = get_number(doc, "m", e.m, "$");
  e.lambda = get_number(doc, "lambda", e.lambda, "$");
  e.lr = get_number(doc, "lr", e.lr, "$");
  e.batch_size = get_int(doc, "batch_size", e.batch_size, "$");
  e.initial_epochs = get_int(doc, "initial_epochs", e.initial_epochs, "$");
  e.epochs_between_samplings =
      get_int(doc, "epochs_between_samplings", e.epochs_between_samplings, "$");
  e.budget_fraction = get_number(doc, "budget_fraction", e.budget_fraction, "$");
  e.step_fraction = get_number(doc, "step_fraction", e.step_fraction, "$");

  const std::string strategy = get_string(doc, "strategy", "margin", "$");
  try {
    e.strategy = strategy_from_name(strategy);
  } catch (const std::invalid_argument& ex) {
    fail("$.strategy", ex.what());
  }

  const std::string reduction = get_string(doc, "reduction", "sum", "$");
  if (reduction == "sum") {
    e.mean_reduction = false;
  } else if (reduction == "mean") {
    e.mean_reduction = true;
  } else {
    fail("$.reduction", "expected \"sum\" or \"mean\"");
  }
  e.random_init = get_bool(doc, "random_init", false, "$");

  if (doc.contains("seed")) {
    if (!doc.at("seed").is_number_integer()) fail("$.seed", "expected an integer");
    e.seed = doc.at("seed").get<std::uint64_t>();
  }

  if (doc.contains("dataset")) {
    cfg.dataset = parse_dataset(doc.at("dataset"), "$.dataset");
  }
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("config error at $: not valid JSON (" +
                                std::string(e.what()) + ")");
  }
  return parse_run_config(doc);
}

nlohmann::json run_config_to_json(const RunConfig& cfg) {
  const ExperimentConfig& e = cfg.experiment;
  json doc;
  doc["loss"] = e.loss == LossKind::kMargin ? "margin" : "dynamic_margin";
  doc["ce_weight"] = e.ce_weight;
  doc["m"] = e.m;
  doc["lambda"] = e.lambda;
  doc["lr"] = e.lr;
  doc["batch_size"] = e.batch_size;
  doc["initial_epochs"] = e.initial_epochs;
  doc["epochs_between_samplings"] = e.epochs_between_samplings;
  doc["budget_fraction"] = e.budget_fraction;
  doc["step_fraction"] = e.step_fraction;
  doc["strategy"] = strategy_name(e.strategy);
  doc["reduction"] = e.mean_reduction ? "mean" : "sum";
  doc["random_init"] = e.random_init;
  doc["seed"] = e.seed;
  json ds;
  if (cfg.dataset.kind == DatasetSpec::Kind::kSynthetic) {
    const SyntheticConfig& s = cfg.dataset.synthetic;
    ds["kind"] = "synthetic";
    ds["k"] = s.num_classes;
    ds["d"] = s.dim;
    ds["per_class_source"] = s.per_class_source;
    ds["per_class_target"] = s.per_class_target;
    ds["per_class_test"] = s.per_class_test;
    ds["cluster_std"] = s.cluster_std;
    ds["shift_magnitude"] = s.shift_magnitude;
    ds["rotation_angle"] = s.rotation_angle;
    if (cfg.dataset.synthetic_seed_explicit) ds["seed"] = s.seed;
  } else {
    ds["kind"] = "csv";
    ds["path"] = cfg.dataset.csv_path;
  }
  doc["dataset"] = ds;
  return doc;
}

DomainDataset make_dataset(const DatasetSpec& spec, std::uint64_t run_seed) {
  if (spec.kind == DatasetSpec::Kind::kCsv) {
    return load_feature_csv(spec.csv_path);
  }
  SyntheticConfig cfg = spec.synthetic;
  if (!spec.synthetic_seed_explicit) {
    std::uint64_t s = run_seed ^ 0x2545f4914f6cdd1dULL;
    cfg.seed = splitmix64(s);
  }
  return generate_shifted_gaussians(cfg);
}

}  // namespace sdm
