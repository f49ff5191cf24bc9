#include "sdg/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include <json.hpp>

#include "sdg/png_io.hpp"

namespace sdg {

namespace {

void require_level_disjoint(const std::vector<double>& holdout, const std::vector<double>& training,
                            const char* what) {
  for (double h : holdout)
    for (double t : training)
      require(std::abs(h - t) > 1e-9, Errc::spec_overlap,
              std::string("pseudo-real ") + what + " level " + std::to_string(h) +
                  " collides with a training level");
}

double balanced_accuracy(const ConfusionMatrix& cm) { return report(cm).balanced_accuracy; }

nlohmann::ordered_json cm_json(const ConfusionMatrix& cm) {
  return {{"tp_pass", cm.tp_pass},
          {"pass_as_fail", cm.pass_as_fail},
          {"fail_as_pass", cm.fail_as_pass},
          {"tp_fail", cm.tp_fail}};
}

void write_grid_csv(const std::filesystem::path& path, const ExperimentReport& report,
                    const std::function<double(const CellResult&)>& value) {
  std::ofstream out(path);
  require(out.good(), Errc::io, "cannot open for writing: " + path.string());
  out << "pass_shots\\fail_shots";
  for (int f : report.fail_shots) out << "," << f;
  out << "\n";
  for (int p : report.pass_shots) {
    out << p;
    for (int f : report.fail_shots) {
      out << ",";
      const auto it = std::find_if(report.cells.begin(), report.cells.end(),
                                   [&](const CellResult& c) { return c.n_pass == p && c.n_fail == f; });
      if (it != report.cells.end()) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.6f", value(*it));
        out << buf;
      }
    }
    out << "\n";
  }
  require(out.good(), Errc::io, "write failed: " + path.string());
}

}  // namespace

void PseudoRealSpec::validate_against(const DOESpec& training) const {
  require(pass_count >= 1 && fail_count >= 1, Errc::config_invalid,
          "pseudo-real class counts must be >= 1");
  require(!holdout_angles_deg.empty() && !holdout_roughness.empty() && !holdout_power.empty() &&
              !background_ids.empty() && !exposure_levels.empty(),
          Errc::config_invalid, "every pseudo-real factor needs at least one level");

  std::vector<double> training_angles = training.pass_angles_deg;
  training_angles.insert(training_angles.end(), training.fail_angles_deg.begin(),
                         training.fail_angles_deg.end());
  require_level_disjoint(holdout_angles_deg, training_angles, "angle");
  require_level_disjoint(holdout_roughness, training.roughness_levels, "roughness");
  require_level_disjoint(holdout_power, training.power_levels, "power");
  require_level_disjoint(exposure_levels, training.exposure_levels, "exposure");
  for (int id : background_ids)
    for (int t : training.background_ids)
      require(id != t, Errc::spec_overlap,
              "pseudo-real background id " + std::to_string(id) + " is used in training");
}

GenerateResult generate_pseudo_real(const PseudoRealSpec& spec, const DOESpec& training,
                                    const SceneConfig& scene, double decision_threshold_deg,
                                    const std::filesystem::path& out_dir, int workers) {
  spec.validate_against(training);
  const AngleClassSpec cls = make_class_spec(training, decision_threshold_deg);

  std::vector<double> pass_angles, fail_angles;
  for (double a : spec.holdout_angles_deg)
    (classify_angle(a, cls) == Label::pass ? pass_angles : fail_angles).push_back(a);
  require(!pass_angles.empty() && !fail_angles.empty(), Errc::config_invalid,
          "holdout angles must fall on both sides of the decision threshold");

  // Distinct part configurations over the holdout grid, pass block first.
  std::vector<PartConfig> configs;
  auto emit_class = [&](const std::vector<double>& angles, Label label) {
    for (double a : angles)
      for (double r : spec.holdout_roughness)
        for (double w : spec.holdout_power) {
          PartConfig c;
          c.config_id = static_cast<int>(configs.size());
          c.bend_angle_deg = a;
          c.roughness = r;
          c.power_watts = w;
          c.label = label;
          configs.push_back(c);
        }
  };
  emit_class(pass_angles, Label::pass);
  emit_class(fail_angles, Label::fail);

  // Exact class counts by cycling each class's combo grid round-robin;
  // the replicate index keeps seeds unique.
  const std::uint64_t master = derive_seed(training.master_seed, {0x9551u});
  DatasetJob job;
  job.scene = scene;
  job.out_dir = out_dir;
  job.workers = workers;
  auto emit_plans = [&](Label label, int count) {
    std::vector<const PartConfig*> class_configs;
    for (const auto& c : configs)
      if (c.label == label) class_configs.push_back(&c);
    std::vector<std::pair<const PartConfig*, std::pair<int, int>>> combos;  // config x (bg, exposure idx)
    for (const PartConfig* c : class_configs)
      for (int bg : spec.background_ids)
        for (std::size_t ei = 0; ei < spec.exposure_levels.size(); ++ei)
          combos.push_back({c, {bg, static_cast<int>(ei)}});
    for (int i = 0; i < count; ++i) {
      const auto& combo = combos[static_cast<std::size_t>(i) % combos.size()];
      CompositePlan plan;
      plan.plan_id = static_cast<int>(job.plans.size());
      plan.part = *combo.first;
      plan.background_id = combo.second.first;
      plan.exposure_index = combo.second.second;
      plan.exposure_level = spec.exposure_levels[static_cast<std::size_t>(combo.second.second)];
      plan.replicate_index = i / static_cast<int>(combos.size());
      plan.derived_seed = plan_seed(master, plan.part.config_id, plan.background_id, plan.exposure_index,
                                    plan.replicate_index);
      job.plans.push_back(plan);
      job.splits.push_back("pseudo_real");
    }
  };
  emit_plans(Label::pass, spec.pass_count);
  emit_plans(Label::fail, spec.fail_count);

  for (int id : spec.background_ids)
    job.backgrounds.emplace(id, make_procedural_background(id, training.master_seed, scene.canvas,
                                                           scene.canvas));
  return execute_dataset_job(job);
}

FewShotSample few_shot_sample(const std::vector<ManifestRecord>& pool, int n_pass, int n_fail,
                              std::uint64_t seed) {
  require(n_pass >= 0 && n_fail >= 0, Errc::sampling, "shot counts must be non-negative");
  std::vector<std::size_t> pass_idx, fail_idx;
  for (std::size_t i = 0; i < pool.size(); ++i)
    (pool[i].label == Label::pass ? pass_idx : fail_idx).push_back(i);
  require(pass_idx.size() >= static_cast<std::size_t>(n_pass), Errc::sampling,
          "pool has too few pass records: " + std::to_string(pass_idx.size()) + " < " +
              std::to_string(n_pass));
  require(fail_idx.size() >= static_cast<std::size_t>(n_fail), Errc::sampling,
          "pool has too few fail records: " + std::to_string(fail_idx.size()) + " < " +
              std::to_string(n_fail));

  std::vector<std::uint8_t> taken(pool.size(), 0);
  auto draw = [&](std::vector<std::size_t>& idx, int n, std::uint64_t stream) {
    Rng rng(derive_seed(seed, {0xf5u, stream}));
    // Partial Fisher-Yates: the first n entries are the sample.
    for (int k = 0; k < n; ++k) {
      const std::size_t j = static_cast<std::size_t>(k) +
                            rng.uniform_index(static_cast<std::uint64_t>(idx.size() - static_cast<std::size_t>(k)));
      std::swap(idx[static_cast<std::size_t>(k)], idx[j]);
      taken[idx[static_cast<std::size_t>(k)]] = 1;
    }
  };
  draw(pass_idx, n_pass, 0);
  draw(fail_idx, n_fail, 1);

  FewShotSample sample;
  for (std::size_t i = 0; i < pool.size(); ++i)
    (taken[i] ? sample.train_ids : sample.eval_ids).push_back(pool[i].plan_id);
  std::sort(sample.train_ids.begin(), sample.train_ids.end());
  return sample;
}

void ShotGrid::validate() const {
  require(!pass_shots.empty() && !fail_shots.empty(), Errc::config_invalid, "shot lists must be nonempty");
  for (int s : pass_shots) require(s >= 1, Errc::config_invalid, "shot counts must be >= 1");
  for (int s : fail_shots) require(s >= 1, Errc::config_invalid, "shot counts must be >= 1");
  require(repetitions >= 1, Errc::config_invalid, "repetitions must be >= 1");
}

EvalPool EvalPool::load(const std::vector<ManifestRecord>& records,
                        const std::filesystem::path& dataset_root, const PreprocessSpec& spec,
                        int workers) {
  EvalPool pool;
  pool.plan_ids.resize(records.size());
  pool.samples.resize(records.size());
  pool.eval_features.resize(records.size());
  run_parallel(records.size(), workers, [&](std::size_t i) {
    const ManifestRecord& r = records[i];
    const ImageU8 image = read_png(dataset_root / r.image_path);
    pool.plan_ids[i] = r.plan_id;
    pool.samples[i].crop = extract_crop(image, r.bbox, spec);
    pool.samples[i].label = r.label;
    pool.eval_features[i] = preprocess_crop(pool.samples[i].crop, spec, nullptr, false);
  });
  return pool;
}

CellResult run_cell(const ModelParams& sdg_model, const EvalPool& pool, int n_pass, int n_fail,
                    int repetitions, std::uint64_t base_seed, const PreprocessSpec& spec,
                    const TrainConfig& fs_train, int hidden_dim) {
  require(pool.plan_ids.size() == pool.samples.size() && pool.samples.size() == pool.eval_features.size(),
          Errc::domain, "eval pool is inconsistent");
  CellResult cell;
  cell.n_pass = n_pass;
  cell.n_fail = n_fail;

  std::map<int, std::size_t> by_plan;
  for (std::size_t i = 0; i < pool.plan_ids.size(); ++i) by_plan[pool.plan_ids[i]] = i;
  std::vector<ManifestRecord> pool_records(pool.plan_ids.size());
  for (std::size_t i = 0; i < pool.plan_ids.size(); ++i) {
    pool_records[i].plan_id = pool.plan_ids[i];
    pool_records[i].label = pool.samples[i].label;
  }

  for (int rep = 0; rep < repetitions; ++rep) {
    const std::uint64_t rep_seed = derive_seed(
        base_seed, {static_cast<std::uint64_t>(n_pass), static_cast<std::uint64_t>(n_fail),
                    static_cast<std::uint64_t>(rep)});
    FewShotSample sample;
    try {
      sample = few_shot_sample(pool_records, n_pass, n_fail, rep_seed);
    } catch (const Error& e) {
      fail(e.code(), "cell (" + std::to_string(n_pass) + ", " + std::to_string(n_fail) + ") rep " +
                         std::to_string(rep) + ": " + e.what());
    }

    std::vector<LearnerSample> fs_data;
    fs_data.reserve(sample.train_ids.size());
    for (int id : sample.train_ids) fs_data.push_back(pool.samples[by_plan.at(id)]);
    TrainConfig rep_config = fs_train;
    rep_config.seed = rep_seed;
    TrainResult fs_model;
    try {
      fs_model = train(fs_data, spec, rep_config, hidden_dim);
    } catch (const Error& e) {
      fail(e.code(), "cell (" + std::to_string(n_pass) + ", " + std::to_string(n_fail) + ") rep " +
                         std::to_string(rep) + ": " + e.what());
    }

    // Both models score the identical eval ids.
    std::vector<Label> truths, sdg_preds, fs_preds;
    truths.reserve(sample.eval_ids.size());
    for (int id : sample.eval_ids) {
      const std::size_t i = by_plan.at(id);
      truths.push_back(pool.samples[i].label);
      sdg_preds.push_back(predict_features(sdg_model, pool.eval_features[i]).label);
      fs_preds.push_back(predict_features(fs_model.params, pool.eval_features[i]).label);
    }
    const ConfusionMatrix sdg_cm = confusion(sdg_preds, truths);
    const ConfusionMatrix fs_cm = confusion(fs_preds, truths);
    cell.sdg_cm.push_back(sdg_cm);
    cell.fs_cm.push_back(fs_cm);
    cell.sdg_bacc.push_back(balanced_accuracy(sdg_cm));
    cell.fs_bacc.push_back(balanced_accuracy(fs_cm));
  }

  cell.sdg_mean = mean_of(cell.sdg_bacc);
  cell.sdg_half_range = half_range(cell.sdg_bacc);
  cell.fs_mean = mean_of(cell.fs_bacc);
  cell.fs_half_range = half_range(cell.fs_bacc);
  cell.diff_mean = cell.sdg_mean - cell.fs_mean;
  return cell;
}

ExperimentReport run_grid(const ModelParams& sdg_model, const EvalPool& pool, const ShotGrid& grid,
                          const PreprocessSpec& spec, const TrainConfig& fs_train, int hidden_dim,
                          int workers) {
  grid.validate();
  ExperimentReport report;
  report.pass_shots = grid.pass_shots;
  report.fail_shots = grid.fail_shots;

  // Zero-shot: frozen SDG model over the whole pool.
  std::vector<Label> truths, preds;
  for (std::size_t i = 0; i < pool.samples.size(); ++i) {
    truths.push_back(pool.samples[i].label);
    preds.push_back(predict_features(sdg_model, pool.eval_features[i]).label);
  }
  report.zero_shot_cm = confusion(preds, truths);
  report.zero_shot_balanced_accuracy = balanced_accuracy(report.zero_shot_cm);

  std::vector<std::pair<int, int>> cells;
  for (int p : grid.pass_shots)
    for (int f : grid.fail_shots)
      if (p >= f) cells.push_back({p, f});
  report.cells.resize(cells.size());
  run_parallel(cells.size(), workers, [&](std::size_t i) {
    report.cells[i] = run_cell(sdg_model, pool, cells[i].first, cells[i].second, grid.repetitions,
                               grid.base_seed, spec, fs_train, hidden_dim);
  });
  return report;
}

double mean_of(const std::vector<double>& values) {
  require(!values.empty(), Errc::domain, "mean of an empty list");
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

double half_range(const std::vector<double>& values) {
  require(!values.empty(), Errc::domain, "half-range of an empty list");
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  return (*hi - *lo) / 2.0;
}

double shot_average(const std::vector<double>& per_shot_means) { return mean_of(per_shot_means); }

void write_experiment_report(const ExperimentReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  nlohmann::ordered_json j;
  j["zero_shot"] = {{"balanced_accuracy", report.zero_shot_balanced_accuracy},
                    {"confusion_matrix", cm_json(report.zero_shot_cm)}};
  j["pass_shots"] = report.pass_shots;
  j["fail_shots"] = report.fail_shots;
  nlohmann::ordered_json cells = nlohmann::ordered_json::array();
  for (const auto& cell : report.cells) {
    nlohmann::ordered_json c;
    c["pass_shots"] = cell.n_pass;
    c["fail_shots"] = cell.n_fail;
    c["sdg"] = {{"balanced_accuracy", cell.sdg_bacc},
                {"mean", cell.sdg_mean},
                {"half_range", cell.sdg_half_range}};
    c["fs_real"] = {{"balanced_accuracy", cell.fs_bacc},
                    {"mean", cell.fs_mean},
                    {"half_range", cell.fs_half_range}};
    c["diff_mean"] = cell.diff_mean;
    nlohmann::ordered_json reps = nlohmann::ordered_json::array();
    for (std::size_t r = 0; r < cell.sdg_cm.size(); ++r)
      reps.push_back({{"sdg_cm", cm_json(cell.sdg_cm[r])}, {"fs_cm", cm_json(cell.fs_cm[r])}});
    c["repetitions"] = reps;
    cells.push_back(c);
  }
  j["cells"] = cells;

  std::ofstream out(dir / "experiment.json");
  require(out.good(), Errc::io, "cannot open for writing: " + (dir / "experiment.json").string());
  out << j.dump(2) << "\n";
  require(out.good(), Errc::io, "write failed: experiment.json");

  write_grid_csv(dir / "sdg_means.csv", report, [](const CellResult& c) { return c.sdg_mean; });
  write_grid_csv(dir / "fs_real_means.csv", report, [](const CellResult& c) { return c.fs_mean; });
  write_grid_csv(dir / "diff_means.csv", report, [](const CellResult& c) { return c.diff_mean; });
}

}  // namespace sdg
