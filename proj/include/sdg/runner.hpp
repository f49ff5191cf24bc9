#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "sdg/config.hpp"

namespace sdg {

struct StageResult {
  std::string name;
  double seconds = 0.0;
  bool ok = false;
  std::string detail;  // one-line summary for the console
};

// Stage drivers; each throws sdg::Error on failure. Layout under
// config.output_dir:
//   dataset/      train/val image+label trees, manifest.jsonl, summary.json
//   pseudo_real/  holdout tree, manifest.jsonl, summary.json
//   model.bin, train_history.json
//   reports/      classify/detect/experiment outputs
//   run.json      config hash, seed, version, per-stage timings
StageResult run_generate(const RunConfig& config);
StageResult run_pseudo_real(const RunConfig& config);
StageResult run_train(const RunConfig& config);
StageResult run_eval_classify(const RunConfig& config, const std::filesystem::path& predictions_file,
                              const std::filesystem::path& manifest_path);
StageResult run_eval_detect(const RunConfig& config, const std::filesystem::path& predictions_dir,
                            const std::string& split);
StageResult run_experiment(const RunConfig& config);

// Runs one CLI command ("generate", "pseudo-real", "train", "eval-classify",
// "eval-detect", "experiment", "all"), prints progress, writes run.json.
// Returns the process exit status.
int dispatch(const std::string& command, const RunConfig& config,
             const std::filesystem::path& predictions = {}, const std::string& split = "val",
             const std::filesystem::path& manifest = {});

}  // namespace sdg
