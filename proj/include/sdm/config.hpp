#pragma once

#include <cstdint>
#include <string>

#include "sdm/data.hpp"
#include "sdm/loop.hpp"

#include <nlohmann/json_fwd.hpp>

namespace sdm {

// Where the run's data comes from: a synthetic generator spec or a feature
// CSV path. A synthetic spec without an explicit seed derives one from the
// run seed, so sweeps over seeds stay paired across strategies.
struct DatasetSpec {
  enum class Kind { kSynthetic, kCsv };
  Kind kind = Kind::kSynthetic;
  SyntheticConfig synthetic;
  bool synthetic_seed_explicit = false;
  std::string csv_path;
};

struct RunConfig {
  ExperimentConfig experiment;
  DatasetSpec dataset;
};

// Parses the config JSON document. Every key is optional with the default
// schedule above; unknown keys are a hard error. Errors carry the JSON
// path of the offending key (e.g. "$.dataset.kind").
RunConfig parse_run_config(const nlohmann::json& doc);
RunConfig load_run_config(const std::string& path);

// Resolved-config snapshot (all defaults filled in), as written to the
// manifest.
nlohmann::json run_config_to_json(const RunConfig& cfg);

DomainDataset make_dataset(const DatasetSpec& spec, std::uint64_t run_seed);

}  // namespace sdm
