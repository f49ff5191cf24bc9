#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "sdg/learner.hpp"
#include "sdg/metrics.hpp"
#include "sdg/pipeline.hpp"

namespace sdg {

// Desk-scale stand-in for a real evaluation set: rendered through the same
// pipeline but at parameter levels deliberately excluded from training, with
// the real set's 11:1 class imbalance.
struct PseudoRealSpec {
  std::vector<double> holdout_angles_deg{-2.5, 2.5, 7.5, 17.5, 22.5, 27.5};
  std::vector<double> holdout_roughness{0.3, 0.5};
  std::vector<double> holdout_power{7.5, 12.5};
  std::vector<int> background_ids{3, 4};
  std::vector<double> exposure_levels{0.9, 1.1};
  int pass_count = 275;
  int fail_count = 25;

  // Every level must be absent from the training design.
  void validate_against(const DOESpec& training) const;
};

GenerateResult generate_pseudo_real(const PseudoRealSpec& spec, const DOESpec& training,
                                    const SceneConfig& scene, double decision_threshold_deg,
                                    const std::filesystem::path& out_dir, int workers);

// Uniform without-replacement draw of n_pass/n_fail records per class; eval
// ids are the rest of the pool, in pool order.
struct FewShotSample {
  std::vector<int> train_ids;  // plan ids, ascending
  std::vector<int> eval_ids;
};
FewShotSample few_shot_sample(const std::vector<ManifestRecord>& pool, int n_pass, int n_fail,
                              std::uint64_t seed);

struct ShotGrid {
  std::vector<int> pass_shots{2, 4, 6, 8, 10};
  std::vector<int> fail_shots{2, 4, 6, 8, 10};
  int repetitions = 5;
  std::uint64_t base_seed = 20260501ull;

  void validate() const;
};

// Pseudo-real pool with cached crops (for few-shot training) and cached
// eval-mode features (deterministic, so computed once).
struct EvalPool {
  std::vector<int> plan_ids;
  std::vector<LearnerSample> samples;
  std::vector<std::vector<double>> eval_features;

  static EvalPool load(const std::vector<ManifestRecord>& records,
                       const std::filesystem::path& dataset_root, const PreprocessSpec& spec, int workers);
};

struct CellResult {
  int n_pass = 0;
  int n_fail = 0;
  std::vector<double> sdg_bacc;  // per repetition
  std::vector<double> fs_bacc;
  std::vector<ConfusionMatrix> sdg_cm;
  std::vector<ConfusionMatrix> fs_cm;
  double sdg_mean = 0, sdg_half_range = 0;
  double fs_mean = 0, fs_half_range = 0;
  double diff_mean = 0;  // SDG minus FS-Real
};

struct ExperimentReport {
  double zero_shot_balanced_accuracy = 0;  // frozen SDG model on the full pool
  ConfusionMatrix zero_shot_cm;
  std::vector<int> pass_shots;
  std::vector<int> fail_shots;
  std::vector<CellResult> cells;  // cells with pass >= fail, row-major over the shot lists
};

// One grid cell: per repetition, sample shots, train FS-Real from fresh
// initialization, evaluate both models on the identical held-out ids.
// Repetition r of cell (p, f) draws from derive_seed(base, p, f, r).
CellResult run_cell(const ModelParams& sdg_model, const EvalPool& pool, int n_pass, int n_fail,
                    int repetitions, std::uint64_t base_seed, const PreprocessSpec& spec,
                    const TrainConfig& fs_train, int hidden_dim);

ExperimentReport run_grid(const ModelParams& sdg_model, const EvalPool& pool, const ShotGrid& grid,
                          const PreprocessSpec& spec, const TrainConfig& fs_train, int hidden_dim,
                          int workers = 1);

// Aggregation helpers (the error-bar statistic is the half-range).
double mean_of(const std::vector<double>& values);
double half_range(const std::vector<double>& values);
double shot_average(const std::vector<double>& per_shot_means);  // the Average row

// experiment.json plus one CSV grid per heatmap (SDG means, FS-Real means,
// SDG-minus-FS differences).
void write_experiment_report(const ExperimentReport& report, const std::filesystem::path& dir);

}  // namespace sdg
