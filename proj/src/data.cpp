#include "sdm/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "sdm/rng.hpp"

namespace sdm {

namespace {

int infer_num_classes(const std::vector<Sample>& source,
                      const std::vector<Sample>& target,
                      const std::vector<Sample>& test) {
  int max_label = -1;
  auto scan = [&max_label](const std::vector<Sample>& set) {
    for (const Sample& s : set) max_label = std::max(max_label, s.label);
  };
  scan(source);
  scan(target);
  scan(test);
  return max_label + 1;
}

void append_double(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

std::string format_row(const char* domain, int label, const FeatureVector& f,
                       const int* selected_round) {
  std::string row = domain;
  row += ',';
  row += std::to_string(label);
  for (double v : f) {
    row += ',';
    append_double(row, v);
  }
  if (selected_round != nullptr) {
    row += ',';
    row += std::to_string(*selected_round);
  }
  row += '\n';
  return row;
}

}  // namespace

DomainDataset::DomainDataset(std::vector<Sample> source, std::vector<Sample> target,
                             std::vector<Sample> target_test)
    : source_(std::move(source)), target_test_(std::move(target_test)) {
  num_classes_ = infer_num_classes(source_, target, target_test_);
  if (num_classes_ < 2) {
    throw std::invalid_argument("DomainDataset: need at least two classes");
  }
  int d = -1;
  auto check_dim = [&d](const std::vector<Sample>& set, const char* name) {
    for (const Sample& s : set) {
      if (s.label < 0) throw std::invalid_argument("DomainDataset: negative label");
      if (d == -1) d = static_cast<int>(s.f.size());
      if (static_cast<int>(s.f.size()) != d) {
        throw std::invalid_argument(std::string("DomainDataset: inconsistent dim in ") +
                                    name);
      }
    }
  };
  check_dim(source_, "source");
  check_dim(target, "target");
  check_dim(target_test_, "target_test");
  if (d <= 0) throw std::invalid_argument("DomainDataset: empty dataset");
  dim_ = d;

  target_features_.reserve(target.size());
  hidden_labels_.reserve(target.size());
  for (Sample& s : target) {
    target_features_.push_back(std::move(s.f));
    hidden_labels_.push_back(s.label);
  }
  annotated_.assign(target_features_.size(), 0);
}

bool DomainDataset::is_annotated(int pool_index) const {
  if (pool_index < 0 || pool_index >= target_pool_size()) {
    throw std::out_of_range("is_annotated: pool index out of range");
  }
  return annotated_[pool_index] != 0;
}

const FeatureVector& DomainDataset::target_feature(int pool_index) const {
  if (pool_index < 0 || pool_index >= target_pool_size()) {
    throw std::out_of_range("target_feature: pool index out of range");
  }
  return target_features_[pool_index];
}

UnlabeledPool DomainDataset::unlabeled_pool() const {
  UnlabeledPool pool;
  pool.indices.reserve(unlabeled_count());
  pool.features.reserve(unlabeled_count());
  for (int i = 0; i < target_pool_size(); ++i) {
    if (!annotated_[i]) {
      pool.indices.push_back(i);
      pool.features.push_back(&target_features_[i]);
    }
  }
  return pool;
}

int DomainDataset::oracle_annotate(int pool_index) {
  if (pool_index < 0 || pool_index >= target_pool_size()) {
    throw std::out_of_range("oracle_annotate: pool index out of range");
  }
  if (annotated_[pool_index]) {
    throw std::logic_error("oracle_annotate: index " + std::to_string(pool_index) +
                           " already annotated");
  }
  annotated_[pool_index] = 1;
  ++annotated_count_;
  const int label = hidden_labels_[pool_index];
  labeled_target_.push_back({target_features_[pool_index], label});
  return label;
}

std::string DomainDataset::to_csv(const std::vector<int>* selected_round) const {
  if (selected_round != nullptr &&
      static_cast<int>(selected_round->size()) != target_pool_size()) {
    throw std::invalid_argument("to_csv: selection flags size mismatch");
  }
  std::string out = "domain,label";
  for (int j = 0; j < dim_; ++j) out += ",f" + std::to_string(j);
  if (selected_round != nullptr) out += ",selected_round";
  out += '\n';
  const int none = -1;
  for (const Sample& s : source_) {
    out += format_row("source", s.label, s.f, selected_round ? &none : nullptr);
  }
  for (int i = 0; i < target_pool_size(); ++i) {
    const int* flag = selected_round ? &(*selected_round)[i] : nullptr;
    out += format_row("target", hidden_labels_[i], target_features_[i], flag);
  }
  for (const Sample& s : target_test_) {
    out += format_row("target_test", s.label, s.f, selected_round ? &none : nullptr);
  }
  return out;
}

void DomainDataset::write_feature_csv(const std::string& path,
                                      const std::vector<int>* selected_round) const {
  const std::string body = to_csv(selected_round);
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open for writing: " + tmp);
    f.write(body.data(), static_cast<std::streamsize>(body.size()));
    if (!f) throw std::runtime_error("write failed: " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

std::uint64_t DomainDataset::fingerprint() const {
  const std::string body = to_csv(nullptr);
  return fnv1a64(body.data(), body.size());
}

DomainDataset generate_shifted_gaussians(const SyntheticConfig& cfg) {
  if (cfg.num_classes < 2) {
    throw std::invalid_argument("generate_shifted_gaussians: num_classes must be >= 2");
  }
  if (cfg.dim < 1) throw std::invalid_argument("generate_shifted_gaussians: dim must be >= 1");
  if (cfg.per_class_source < 1 || cfg.per_class_target < 1 || cfg.per_class_test < 1) {
    throw std::invalid_argument("generate_shifted_gaussians: counts must be positive");
  }
  if (!(cfg.cluster_std > 0.0)) {
    throw std::invalid_argument("generate_shifted_gaussians: cluster_std must be > 0");
  }
  if (cfg.dim < 2 && cfg.rotation_angle != 0.0) {
    throw std::invalid_argument("generate_shifted_gaussians: rotation needs dim >= 2");
  }

  Rng rng(cfg.seed);
  const int d = cfg.dim;
  constexpr double kMeanRadius = 3.0;

  auto unit_normal_vec = [&rng, d]() {
    FeatureVector v(d);
    double norm2 = 0.0;
    do {
      for (int j = 0; j < d; ++j) v[j] = rng.next_normal();
      norm2 = dot(v.data(), v.data(), d);
    } while (norm2 < 1e-12);
    const double inv = 1.0 / std::sqrt(norm2);
    for (double& x : v) x *= inv;
    return v;
  };

  // Source class means: random directions at a fixed radius, resampled a
  // bounded number of times to keep pairwise angles open.
  std::vector<FeatureVector> means;
  for (int k = 0; k < cfg.num_classes; ++k) {
    FeatureVector best;
    double best_cos = 2.0;
    for (int attempt = 0; attempt < 64; ++attempt) {
      FeatureVector cand = unit_normal_vec();
      double worst = -1.0;
      for (const FeatureVector& m : means) {
        worst = std::max(worst, dot(cand.data(), m.data(), d) / kMeanRadius);
      }
      if (worst < best_cos) {
        best_cos = worst;
        best = cand;
      }
      if (worst < 0.8) break;
    }
    for (double& x : best) x *= kMeanRadius;
    means.push_back(std::move(best));
  }

  // Rotation plane and translation direction for the target shift.
  FeatureVector u(d, 0.0), v(d, 0.0), shift_dir(d, 0.0);
  if (d >= 2) {
    u = unit_normal_vec();
    double vnorm2 = 0.0;
    do {
      v = unit_normal_vec();
      const double uv = dot(u.data(), v.data(), d);
      for (int j = 0; j < d; ++j) v[j] -= uv * u[j];
      vnorm2 = dot(v.data(), v.data(), d);
    } while (vnorm2 < 1e-12);
    const double inv = 1.0 / std::sqrt(vnorm2);
    for (double& x : v) x *= inv;
  }
  shift_dir = unit_normal_vec();

  const double c = std::cos(cfg.rotation_angle);
  const double s = std::sin(cfg.rotation_angle);
  auto target_mean = [&](const FeatureVector& mean) {
    FeatureVector out = mean;
    if (d >= 2 && cfg.rotation_angle != 0.0) {
      const double a = dot(u.data(), mean.data(), d);
      const double b = dot(v.data(), mean.data(), d);
      for (int j = 0; j < d; ++j) {
        out[j] += (c - 1.0) * (a * u[j] + b * v[j]) + s * (a * v[j] - b * u[j]);
      }
    }
    for (int j = 0; j < d; ++j) out[j] += cfg.shift_magnitude * shift_dir[j];
    return out;
  };

  auto draw_set = [&](const std::vector<FeatureVector>& centers, int per_class) {
    std::vector<Sample> set;
    set.reserve(static_cast<std::size_t>(per_class) * cfg.num_classes);
    for (int k = 0; k < cfg.num_classes; ++k) {
      for (int i = 0; i < per_class; ++i) {
        FeatureVector f(d);
        for (int j = 0; j < d; ++j) {
          f[j] = centers[k][j] + cfg.cluster_std * rng.next_normal();
        }
        set.push_back({std::move(f), k});
      }
    }
    return set;
  };

  std::vector<FeatureVector> target_means;
  target_means.reserve(means.size());
  for (const FeatureVector& m : means) target_means.push_back(target_mean(m));

  std::vector<Sample> source = draw_set(means, cfg.per_class_source);
  std::vector<Sample> target = draw_set(target_means, cfg.per_class_target);
  std::vector<Sample> test = draw_set(target_means, cfg.per_class_test);
  return DomainDataset(std::move(source), std::move(target), std::move(test));
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  fields.push_back(cur);
  return fields;
}

[[noreturn]] void parse_fail(int line_no, const std::string& why) {
  throw std::runtime_error("feature csv parse error at line " +
                           std::to_string(line_no) + ": " + why);
}

}  // namespace

DomainDataset load_feature_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open feature csv: " + path);

  std::string line;
  int line_no = 0;
  if (!std::getline(in, line)) parse_fail(1, "missing header");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();

  std::vector<std::string> header = split_csv_line(line);
  if (header.size() < 3 || header[0] != "domain" || header[1] != "label") {
    parse_fail(1, "header must be domain,label,f0,...");
  }
  // Selection-flag dumps append a trailing selected_round column; it is
  // accepted and ignored on load.
  const bool has_flags = header.back() == "selected_round";
  const int d = static_cast<int>(header.size()) - 2 - (has_flags ? 1 : 0);
  if (d < 1) parse_fail(1, "no feature columns");
  for (int j = 0; j < d; ++j) {
    if (header[j + 2] != "f" + std::to_string(j)) {
      parse_fail(1, "feature column " + std::to_string(j + 2) + " must be f" +
                        std::to_string(j));
    }
  }

  std::vector<Sample> source, target, test;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields = split_csv_line(line);
    const int expected = d + 2 + (has_flags ? 1 : 0);
    if (static_cast<int>(fields.size()) != expected) {
      parse_fail(line_no, "expected " + std::to_string(expected) + " fields, got " +
                              std::to_string(fields.size()));
    }
    const std::string& domain = fields[0];
    if (domain != "source" && domain != "target" && domain != "target_test") {
      parse_fail(line_no, "unknown domain '" + domain + "'");
    }
    char* end = nullptr;
    const long label_l = std::strtol(fields[1].c_str(), &end, 10);
    if (end == fields[1].c_str() || *end != '\0') {
      parse_fail(line_no, "label '" + fields[1] + "' is not an integer");
    }
    if (label_l < 0) parse_fail(line_no, "label out of range (negative)");
    Sample s;
    s.label = static_cast<int>(label_l);
    s.f.resize(d);
    for (int j = 0; j < d; ++j) {
      const std::string& cell = fields[j + 2];
      end = nullptr;
      s.f[j] = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str() || *end != '\0') {
        parse_fail(line_no, "feature f" + std::to_string(j) + " '" + cell +
                                "' is not a number");
      }
      if (!std::isfinite(s.f[j])) {
        parse_fail(line_no, "feature f" + std::to_string(j) + " is not finite");
      }
    }
    if (domain == "source") {
      source.push_back(std::move(s));
    } else if (domain == "target") {
      target.push_back(std::move(s));
    } else {
      test.push_back(std::move(s));
    }
  }
  if (source.empty() && target.empty() && test.empty()) {
    parse_fail(line_no, "no data rows");
  }
  try {
    return DomainDataset(std::move(source), std::move(target), std::move(test));
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(std::string("feature csv invalid: ") + e.what());
  }
}

}  // namespace sdm
