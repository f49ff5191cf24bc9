#include "sdg/runner.hpp"

#include <chrono>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "sdg/png_io.hpp"

namespace sdg {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<ManifestRecord> records_for_split(const std::vector<ManifestRecord>& records,
                                              const std::string& split) {
  std::vector<ManifestRecord> out;
  for (const auto& r : records)
    if (r.split == split) out.push_back(r);
  return out;
}

// Crops for the training split, loaded in parallel.
std::vector<LearnerSample> load_split_samples(const std::vector<ManifestRecord>& records,
                                              const std::filesystem::path& root,
                                              const PreprocessSpec& spec, int workers) {
  std::vector<LearnerSample> samples(records.size());
  run_parallel(records.size(), workers, [&](std::size_t i) {
    const ImageU8 image = read_png(root / records[i].image_path);
    samples[i].crop = extract_crop(image, records[i].bbox, spec);
    samples[i].label = records[i].label;
  });
  return samples;
}

void write_run_json(const RunConfig& config, const std::string& command,
                    const std::vector<StageResult>& stages) {
  std::filesystem::create_directories(config.output_dir);
  nlohmann::ordered_json j;
  j["tool_version"] = kToolVersion;
  j["command"] = command;
  j["config_hash"] = config_hash(config);
  j["master_seed"] = config.master_seed;
  nlohmann::ordered_json stage_list = nlohmann::ordered_json::array();
  bool all_ok = true;
  for (const auto& s : stages) {
    stage_list.push_back({{"stage", s.name}, {"seconds", s.seconds}, {"ok", s.ok}, {"detail", s.detail}});
    all_ok = all_ok && s.ok;
  }
  j["stages"] = stage_list;
  j["ok"] = all_ok;
  std::ofstream out(config.output_dir / "run.json");
  if (out.good()) out << j.dump(2) << "\n";
}

}  // namespace

StageResult run_generate(const RunConfig& config) {
  const auto start = Clock::now();
  const GenerateResult result =
      generate_dataset(config.doe, config.scene, config.output_dir / "dataset", config.workers,
                       config.val_fraction, config.background_dir);
  require(result.failed_plans == 0, Errc::annotation,
          std::to_string(result.failed_plans) + " plans failed during generation");
  StageResult stage{"generate", seconds_since(start), true, ""};
  std::ostringstream detail;
  detail << result.summary.total << " images (";
  for (const auto& [key, count] : result.summary.per_label) detail << key << "=" << count << " ";
  detail << "), manifest " << result.manifest_path.string();
  stage.detail = detail.str();
  return stage;
}

StageResult run_pseudo_real(const RunConfig& config) {
  const auto start = Clock::now();
  const GenerateResult result =
      generate_pseudo_real(config.pseudo_real, config.doe, config.scene, config.decision_threshold_deg,
                           config.output_dir / "pseudo_real", config.workers);
  require(result.failed_plans == 0, Errc::annotation,
          std::to_string(result.failed_plans) + " pseudo-real plans failed");
  StageResult stage{"pseudo-real", seconds_since(start), true, ""};
  stage.detail = std::to_string(result.summary.total) + " holdout images";
  return stage;
}

StageResult run_train(const RunConfig& config) {
  const auto start = Clock::now();
  const auto manifest = read_manifest(config.output_dir / "dataset" / "manifest.jsonl");
  const auto train_records = records_for_split(manifest, "train");
  require(!train_records.empty(), Errc::training, "no train-split records; run generate first");

  const std::vector<LearnerSample> samples =
      load_split_samples(train_records, config.output_dir / "dataset", config.preprocess, config.workers);
  const TrainResult result = train(samples, config.preprocess, config.train, config.hidden_dim);
  save_model(config.output_dir / "model.bin", result.params);

  // Validation-split sanity numbers alongside the loss history.
  const auto val_records = records_for_split(manifest, "val");
  nlohmann::ordered_json j;
  j["epoch_loss"] = result.epoch_loss;
  double val_bacc = -1.0;
  if (!val_records.empty()) {
    const std::vector<LearnerSample> val =
        load_split_samples(val_records, config.output_dir / "dataset", config.preprocess, config.workers);
    std::vector<Label> preds, truths;
    for (const auto& s : val) {
      const std::vector<double> f = preprocess_crop(s.crop, config.preprocess, nullptr, false);
      preds.push_back(predict_features(result.params, f).label);
      truths.push_back(s.label);
    }
    val_bacc = report(confusion(preds, truths)).balanced_accuracy;
    j["val_balanced_accuracy"] = val_bacc;
  }
  std::ofstream hist(config.output_dir / "train_history.json");
  require(hist.good(), Errc::io, "cannot write train_history.json");
  hist << j.dump(2) << "\n";

  StageResult stage{"train", seconds_since(start), true, ""};
  std::ostringstream detail;
  detail << train_records.size() << " samples, " << config.train.epochs << " epochs, final loss "
         << (result.epoch_loss.empty() ? 0.0 : result.epoch_loss.back());
  if (val_bacc >= 0.0) detail << ", val balanced accuracy " << val_bacc;
  stage.detail = detail.str();
  return stage;
}

StageResult run_eval_classify(const RunConfig& config, const std::filesystem::path& predictions_file,
                              const std::filesystem::path& manifest_path) {
  const auto start = Clock::now();
  const std::filesystem::path manifest =
      manifest_path.empty() ? config.output_dir / "pseudo_real" / "manifest.jsonl" : manifest_path;
  const auto records = read_manifest(manifest);
  require(!records.empty(), Errc::io, "manifest is empty: " + manifest.string());
  const std::filesystem::path dataset_root = manifest.parent_path();

  std::vector<Label> truths, preds;
  truths.reserve(records.size());
  if (predictions_file.empty()) {
    // No predictions supplied: run the trained model over the manifest.
    const ModelParams model = load_model(config.output_dir / "model.bin");
    std::vector<Label> model_preds(records.size());
    run_parallel(records.size(), config.workers, [&](std::size_t i) {
      const ImageU8 image = read_png(dataset_root / records[i].image_path);
      model_preds[i] = predict(model, image, records[i].bbox, config.preprocess).label;
    });
    for (const auto& r : records) truths.push_back(r.label);
    preds = std::move(model_preds);
  } else {
    std::ifstream in(predictions_file);
    require(in.good(), Errc::io, "cannot open predictions: " + predictions_file.string());
    std::map<int, Label> by_plan;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      std::istringstream ls(line);
      int plan_id;
      std::string label;
      require(static_cast<bool>(ls >> plan_id >> label), Errc::io,
              predictions_file.string() + ":" + std::to_string(line_no) + ": expected '<plan_id> <label>'");
      by_plan[plan_id] = label_from_string(label);
    }
    for (const auto& r : records) {
      const auto it = by_plan.find(r.plan_id);
      require(it != by_plan.end(), Errc::io,
              "no prediction for plan " + std::to_string(r.plan_id) + " in " + predictions_file.string());
      truths.push_back(r.label);
      preds.push_back(it->second);
    }
  }

  const ConfusionMatrix cm = confusion(preds, truths);
  const ClassificationReport rep = report(cm);
  std::filesystem::create_directories(config.output_dir / "reports");
  std::ofstream out(config.output_dir / "reports" / "classify_report.json");
  require(out.good(), Errc::io, "cannot write classify_report.json");
  out << report_json(rep, cm) << "\n";
  std::cout << report_text(rep);

  StageResult stage{"eval-classify", seconds_since(start), true, ""};
  std::ostringstream detail;
  detail << "accuracy " << rep.accuracy << ", balanced accuracy " << rep.balanced_accuracy;
  stage.detail = detail.str();
  return stage;
}

StageResult run_eval_detect(const RunConfig& config, const std::filesystem::path& predictions_dir,
                            const std::string& split) {
  const auto start = Clock::now();
  require(!predictions_dir.empty(), Errc::usage, "eval-detect needs --predictions DIR");
  const auto manifest = read_manifest(config.output_dir / "dataset" / "manifest.jsonl");
  const auto records = records_for_split(manifest, split);
  require(!records.empty(), Errc::io, "no records in split '" + split + "'");

  std::vector<std::filesystem::path> gt_files;
  gt_files.reserve(records.size());
  for (const auto& r : records) gt_files.push_back(config.output_dir / "dataset" / r.label_path);
  const DetectionSet det = load_detection_set(gt_files, predictions_dir, config.scene.canvas,
                                              config.scene.canvas);
  const DetectionMetrics m = map_range(det);

  nlohmann::ordered_json j;
  j["split"] = split;
  j["images"] = records.size();
  j["map50"] = m.map50;
  j["map50_95"] = m.map50_95;
  j["precision"] = m.precision;
  j["recall"] = m.recall;
  j["precision_defined"] = m.precision_defined;
  j["skipped_classes"] = m.skipped_classes;
  std::filesystem::create_directories(config.output_dir / "reports");
  std::ofstream out(config.output_dir / "reports" / "detect_report.json");
  require(out.good(), Errc::io, "cannot write detect_report.json");
  out << j.dump(2) << "\n";
  std::cout << j.dump(2) << "\n";

  StageResult stage{"eval-detect", seconds_since(start), true, ""};
  std::ostringstream detail;
  detail << "mAP@0.5 " << m.map50 << ", mAP@0.5:0.95 " << m.map50_95;
  stage.detail = detail.str();
  return stage;
}

StageResult run_experiment(const RunConfig& config) {
  const auto start = Clock::now();
  const ModelParams model = load_model(config.output_dir / "model.bin");
  const auto records = read_manifest(config.output_dir / "pseudo_real" / "manifest.jsonl");
  require(!records.empty(), Errc::io, "pseudo-real manifest is empty; run pseudo-real first");

  const EvalPool pool =
      EvalPool::load(records, config.output_dir / "pseudo_real", config.preprocess, config.workers);
  const ExperimentReport report = run_grid(model, pool, config.shot_grid, config.preprocess, config.train,
                                           config.hidden_dim, config.workers);
  write_experiment_report(report, config.output_dir / "reports");

  StageResult stage{"experiment", seconds_since(start), true, ""};
  std::ostringstream detail;
  detail << "zero-shot balanced accuracy " << report.zero_shot_balanced_accuracy << ", "
         << report.cells.size() << " grid cells x " << config.shot_grid.repetitions << " repetitions";
  stage.detail = detail.str();
  return stage;
}

int dispatch(const std::string& command, const RunConfig& config, const std::filesystem::path& predictions,
             const std::string& split, const std::filesystem::path& manifest) {
  config.validate();
  std::filesystem::create_directories(config.output_dir);

  std::vector<std::string> stage_names;
  if (command == "all")
    stage_names = {"generate", "pseudo-real", "train", "experiment"};
  else if (command == "generate" || command == "pseudo-real" || command == "train" ||
           command == "eval-classify" || command == "eval-detect" || command == "experiment")
    stage_names = {command};
  else
    fail(Errc::usage, "unknown command: " + command);

  std::vector<StageResult> stages;
  int exit_code = 0;
  for (const auto& name : stage_names) {
    std::cout << "[" << name << "] running...\n" << std::flush;
    try {
      StageResult result;
      if (name == "generate")
        result = run_generate(config);
      else if (name == "pseudo-real")
        result = run_pseudo_real(config);
      else if (name == "train")
        result = run_train(config);
      else if (name == "eval-classify")
        result = run_eval_classify(config, predictions, manifest);
      else if (name == "eval-detect")
        result = run_eval_detect(config, predictions, split);
      else
        result = run_experiment(config);
      std::cout << "[" << name << "] ok in " << result.seconds << " s: " << result.detail << "\n";
      stages.push_back(result);
    } catch (const Error& e) {
      std::cerr << "[" << name << "] failed: " << e.what() << "\n";
      stages.push_back({name, 0.0, false, e.what()});
      exit_code = e.exit_code();
      break;
    }
  }
  write_run_json(config, command, stages);
  return exit_code;
}

}  // namespace sdg
