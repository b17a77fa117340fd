#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sdm/core.hpp"
#include "sdm/query.hpp"

namespace sdm {

// Desk-scale stand-in for externally extracted features: K gaussian
// clusters for the source, and the same clusters translated by
// shift_magnitude and rotated by rotation_angle (in a random 2-plane)
// for the target.
struct SyntheticConfig {
  int num_classes = 10;
  int dim = 32;
  int per_class_source = 100;
  int per_class_target = 100;
  int per_class_test = 100;
  double cluster_std = 1.0;
  double shift_magnitude = 0.0;
  double rotation_angle = 0.0;  // radians
  std::uint64_t seed = 0;
};

// Labeled source pool, target pool with hidden oracle labels, and the
// growing labeled-target set. Target labels are readable only through
// oracle_annotate (and the serialized CSV, which is the oracle's own
// bookkeeping format); query and loss code paths only ever see
// UnlabeledPool.
class DomainDataset {
 public:
  // Target labels passed here become hidden. Class count is inferred from
  // the labels present; at least two classes are required.
  DomainDataset(std::vector<Sample> source, std::vector<Sample> target,
                std::vector<Sample> target_test);

  int num_classes() const { return num_classes_; }
  int dim() const { return dim_; }

  const std::vector<Sample>& source() const { return source_; }
  const std::vector<Sample>& labeled_target() const { return labeled_target_; }
  const std::vector<Sample>& target_test() const { return target_test_; }

  int target_pool_size() const { return static_cast<int>(target_features_.size()); }
  int unlabeled_count() const { return target_pool_size() - annotated_count_; }
  bool is_annotated(int pool_index) const;
  const FeatureVector& target_feature(int pool_index) const;

  // Ascending original indices of the not-yet-annotated samples.
  UnlabeledPool unlabeled_pool() const;

  // Reveals the hidden label and moves the sample into the labeled-target
  // set. Throws on an out-of-range or already-annotated index; a sample
  // can never be annotated twice.
  int oracle_annotate(int pool_index);

  // Feature CSV (header `domain,label,f0,...,f{D-1}`); when selected_round
  // is given a trailing `selected_round` column is appended (-1 for rows
  // never selected).
  void write_feature_csv(const std::string& path,
                         const std::vector<int>* selected_round = nullptr) const;
  std::string to_csv(const std::vector<int>* selected_round = nullptr) const;

  // FNV-1a over the canonical CSV serialization (selection flags excluded).
  std::uint64_t fingerprint() const;

 private:
  int num_classes_ = 0;
  int dim_ = 0;
  std::vector<Sample> source_;
  std::vector<Sample> labeled_target_;
  std::vector<Sample> target_test_;
  std::vector<FeatureVector> target_features_;
  std::vector<int> hidden_labels_;
  std::vector<std::uint8_t> annotated_;
  int annotated_count_ = 0;
};

DomainDataset generate_shifted_gaussians(const SyntheticConfig& cfg);

// Parses the feature CSV format. Malformed rows, ragged dimensions and
// out-of-range labels are reported with their line number.
DomainDataset load_feature_csv(const std::string& path);

}  // namespace sdm
