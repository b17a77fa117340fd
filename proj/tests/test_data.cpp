#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "sdm/data.hpp"
#include "sdm/loop.hpp"

using namespace sdm;
namespace fs = std::filesystem;

namespace {

SyntheticConfig small_cfg() {
  SyntheticConfig cfg;
  cfg.num_classes = 3;
  cfg.dim = 4;
  cfg.per_class_source = 10;
  cfg.per_class_target = 8;
  cfg.per_class_test = 6;
  cfg.cluster_std = 0.3;
  cfg.shift_magnitude = 0.5;
  cfg.rotation_angle = 0.2;
  cfg.seed = 77;
  return cfg;
}

fs::path temp_file(const char* name) {
  return fs::temp_directory_path() / (std::string("sdm_test_") + name);
}

}  // namespace

TEST_SUITE_BEGIN("data");

TEST_CASE("generation is bitwise deterministic under a seed") {
  const DomainDataset a = generate_shifted_gaussians(small_cfg());
  const DomainDataset b = generate_shifted_gaussians(small_cfg());
  CHECK(a.to_csv() == b.to_csv());
  CHECK(a.fingerprint() == b.fingerprint());
  SyntheticConfig other = small_cfg();
  other.seed = 78;
  CHECK(generate_shifted_gaussians(other).fingerprint() != a.fingerprint());
}

TEST_CASE("pool sizes and class count follow the config") {
  const DomainDataset ds = generate_shifted_gaussians(small_cfg());
  CHECK(ds.num_classes() == 3);
  CHECK(ds.dim() == 4);
  CHECK(ds.source().size() == 30);
  CHECK(ds.target_pool_size() == 24);
  CHECK(ds.target_test().size() == 18);
  CHECK(ds.labeled_target().empty());
  CHECK(ds.unlabeled_count() == 24);
}

TEST_CASE("well separated clusters train to near-perfect source accuracy") {
  SyntheticConfig cfg;
  cfg.num_classes = 3;
  cfg.dim = 2;
  cfg.per_class_source = 60;
  cfg.per_class_target = 20;
  cfg.per_class_test = 20;
  cfg.cluster_std = 0.15;
  cfg.shift_magnitude = 0.0;
  cfg.rotation_angle = 0.0;
  cfg.seed = 5;
  const DomainDataset ds = generate_shifted_gaussians(cfg);
  ExperimentConfig ex;
  ex.seed = 5;
  Rng rng(1);
  LinearClassifier clf(ds.num_classes(), ds.dim());
  clf = train_epochs(std::move(clf), ds, ex, 30, rng);
  CHECK(evaluate_accuracy(clf, ds.source()) >= 0.99);
  // zero shift: the target distribution matches, so transfer is free
  CHECK(evaluate_accuracy(clf, ds.target_test()) >= 0.95);
}

TEST_CASE("oracle annotation moves exactly one sample and never repeats") {
  DomainDataset ds = generate_shifted_gaussians(small_cfg());
  const int n = ds.target_pool_size();
  ds.oracle_annotate(3);
  CHECK(ds.labeled_target().size() == 1);
  CHECK(ds.unlabeled_count() == n - 1);
  CHECK(ds.is_annotated(3));
  CHECK_THROWS_AS(ds.oracle_annotate(3), std::logic_error);
  CHECK_THROWS_AS(ds.oracle_annotate(n), std::out_of_range);
  // conservation while annotating everything
  for (int i = 0; i < n; ++i) {
    if (!ds.is_annotated(i)) ds.oracle_annotate(i);
    CHECK(static_cast<int>(ds.labeled_target().size()) + ds.unlabeled_count() == n);
  }
  CHECK(static_cast<int>(ds.labeled_target().size()) == n);
  CHECK(ds.unlabeled_pool().indices.empty());
}

TEST_CASE("revealed labels match the serialized ground truth") {
  DomainDataset ds = generate_shifted_gaussians(small_cfg());
  // the CSV dump is the oracle's bookkeeping: parse target labels back out
  std::istringstream csv(ds.to_csv());
  std::string line;
  std::getline(csv, line);  // header
  std::vector<int> expected;
  while (std::getline(csv, line)) {
    if (line.rfind("target,", 0) == 0) {
      const std::size_t a = line.find(',');
      const std::size_t b = line.find(',', a + 1);
      expected.push_back(std::stoi(line.substr(a + 1, b - a - 1)));
    }
  }
  REQUIRE(static_cast<int>(expected.size()) == ds.target_pool_size());
  for (int i = 0; i < ds.target_pool_size(); ++i) {
    CHECK(ds.oracle_annotate(i) == expected[i]);
  }
}

TEST_CASE("query scoring cannot depend on hidden labels") {
  // identical features, different hidden labels -> identical scores
  const DomainDataset ds = generate_shifted_gaussians(small_cfg());
  std::vector<Sample> source(ds.source());
  std::vector<Sample> test(ds.target_test());
  std::vector<Sample> target_a, target_b;
  for (int i = 0; i < ds.target_pool_size(); ++i) {
    target_a.push_back({ds.target_feature(i), 0});
    target_b.push_back({ds.target_feature(i), 2});
  }
  DomainDataset da(source, target_a, test);
  DomainDataset db(source, target_b, test);
  Rng rng(9);
  const LinearClassifier clf = oracle::random_classifier(rng, 3, 4, 0.5);
  QueryConfig qcfg;
  qcfg.strategy = Strategy::kSdmG;
  OpCounters ca, cb;
  const auto sa = score_pool(da.unlabeled_pool(), clf, qcfg, ca);
  const auto sb = score_pool(db.unlabeled_pool(), clf, qcfg, cb);
  REQUIRE(sa.size() == sb.size());
  for (std::size_t i = 0; i < sa.size(); ++i) {
    CHECK(sa[i].sample_index == sb[i].sample_index);
    CHECK(sa[i].score == sb[i].score);
  }
}

TEST_CASE("feature csv round-trips exactly") {
  const DomainDataset ds = generate_shifted_gaussians(small_cfg());
  const fs::path path = temp_file("roundtrip.csv");
  ds.write_feature_csv(path.string());
  const DomainDataset loaded = load_feature_csv(path.string());
  CHECK(loaded.to_csv() == ds.to_csv());
  CHECK(loaded.fingerprint() == ds.fingerprint());
  fs::remove(path);
}

TEST_CASE("a minimal csv loads with the right pools") {
  const fs::path path = temp_file("minimal.csv");
  {
    std::ofstream f(path);
    f << "domain,label,f0,f1\n"
         "source,0,1.0,2.0\n"
         "source,1,-1.0,0.5\n"
         "target,1,0.25,0.75\n"
         "target_test,0,0.0,1.0\n";
  }
  const DomainDataset ds = load_feature_csv(path.string());
  CHECK(ds.num_classes() == 2);
  CHECK(ds.dim() == 2);
  CHECK(ds.source().size() == 2);
  CHECK(ds.target_pool_size() == 1);
  CHECK(ds.target_test().size() == 1);
  fs::remove(path);
}

TEST_CASE("ragged and malformed rows name their line") {
  const fs::path path = temp_file("ragged.csv");
  {
    std::ofstream f(path);
    f << "domain,label,f0,f1\n"     // line 1
         "source,0,1.0,2.0\n"       // 2
         "source,1,-1.0,0.5\n"      // 3
         "target,0,0.25,0.75\n"     // 4
         "target,1,0.25,0.75\n"     // 5
         "target_test,0,0.0,1.0\n"  // 6
         "source,1,3.0\n";          // 7: ragged
  }
  CHECK_THROWS_WITH_AS(load_feature_csv(path.string()),
                       doctest::Contains("line 7"), std::runtime_error);
  fs::remove(path);

  const fs::path bad_label = temp_file("badlabel.csv");
  {
    std::ofstream f(bad_label);
    f << "domain,label,f0\n"
         "source,zero,1.0\n";
  }
  CHECK_THROWS_WITH_AS(load_feature_csv(bad_label.string()),
                       doctest::Contains("line 2"), std::runtime_error);
  fs::remove(bad_label);

  const fs::path bad_domain = temp_file("baddomain.csv");
  {
    std::ofstream f(bad_domain);
    f << "domain,label,f0\n"
         "sauce,0,1.0\n";
  }
  CHECK_THROWS_WITH_AS(load_feature_csv(bad_domain.string()),
                       doctest::Contains("unknown domain"), std::runtime_error);
  fs::remove(bad_domain);

  CHECK_THROWS_AS(load_feature_csv("/nonexistent/path.csv"), std::runtime_error);
}

TEST_CASE("selection-flag dumps load back (flags ignored)") {
  const DomainDataset ds = generate_shifted_gaussians(small_cfg());
  std::vector<int> flags(ds.target_pool_size(), -1);
  flags[2] = 1;
  flags[5] = 2;
  const fs::path path = temp_file("flags.csv");
  ds.write_feature_csv(path.string(), &flags);
  const DomainDataset loaded = load_feature_csv(path.string());
  CHECK(loaded.fingerprint() == ds.fingerprint());
  fs::remove(path);
}

TEST_CASE("zero shift and rotation leave the two domains aligned") {
  SyntheticConfig cfg = small_cfg();
  cfg.shift_magnitude = 0.0;
  cfg.rotation_angle = 0.0;
  cfg.cluster_std = 0.2;
  const DomainDataset ds = generate_shifted_gaussians(cfg);
  // per-class target means must sit on the source means (sample noise only)
  std::map<int, FeatureVector> source_sum, target_sum;
  std::map<int, int> source_n;
  for (const Sample& s : ds.source()) {
    auto& acc = source_sum.try_emplace(s.label, FeatureVector(ds.dim(), 0.0)).first->second;
    for (int j = 0; j < ds.dim(); ++j) acc[j] += s.f[j];
    source_n[s.label]++;
  }
  for (const Sample& s : ds.target_test()) {
    auto& acc = target_sum.try_emplace(s.label, FeatureVector(ds.dim(), 0.0)).first->second;
    for (int j = 0; j < ds.dim(); ++j) acc[j] += s.f[j];
  }
  for (const auto& [label, acc] : source_sum) {
    for (int j = 0; j < ds.dim(); ++j) {
      const double src_mean = acc[j] / source_n[label];
      const double tgt_mean = target_sum[label][j] / 6.0;  // per_class_test
      CHECK(std::abs(src_mean - tgt_mean) < 0.5);  // noise-level agreement
    }
  }
}

TEST_SUITE_END();
