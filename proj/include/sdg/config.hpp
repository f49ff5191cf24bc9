#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "sdg/doe.hpp"
#include "sdg/harness.hpp"
#include "sdg/learner.hpp"
#include "sdg/pipeline.hpp"

namespace sdg {

inline constexpr int kConfigSchemaVersion = 1;
inline constexpr const char* kToolVersion = "0.1.0";

// One run configuration file drives every stage. JSON with a schema version;
// unknown keys are rejected with the offending line.
struct RunConfig {
  std::uint64_t master_seed = 20260501ull;
  std::filesystem::path output_dir = "out";
  int workers = 1;

  DOESpec doe;  // doe.master_seed mirrors master_seed
  double decision_threshold_deg = 12.5;
  double val_fraction = 0.1;
  SceneConfig scene;
  std::filesystem::path background_dir;  // empty = procedural backgrounds
  PseudoRealSpec pseudo_real;
  PreprocessSpec preprocess;
  TrainConfig train;  // train.seed mirrors master_seed unless set explicitly
  int hidden_dim = 64;
  ShotGrid shot_grid;  // base_seed mirrors master_seed unless set explicitly

  void validate() const;
};

RunConfig default_config();

// 20-image smoke configuration (2 part configs x 10 replicates) with a
// matching 20-image pseudo-real set and shortened training, for CI runs.
RunConfig micro_config(RunConfig base);

RunConfig parse_config(const std::filesystem::path& path);
RunConfig parse_config_text(const std::string& text, const std::string& source_name);

// Canonical JSON; parse(serialize(c)) == c.
std::string serialize_config(const RunConfig& config);

std::uint64_t config_hash(const RunConfig& config);

// Re-applies the master seed to the sub-configs that mirror it.
void propagate_seed(RunConfig& config);

}  // namespace sdg
