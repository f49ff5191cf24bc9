// sdgbench — synthetic inspection dataset generator and evaluation bench.
//
// Subcommands:
//   generate       render + composite the full factorial training set
//   pseudo-real    render the held-out evaluation set
//   train          fit the pass/fail classifier on the train split
//   eval-classify  score label predictions (or the trained model) on a manifest
//   eval-detect    score YOLO-format detections against a split's boxes
//   experiment     zero-shot vs few-shot grid with CSV/JSON reports
//   all            generate -> pseudo-real -> train -> experiment

#include <CLI11.hpp>

#include <iostream>

#include "sdg/config.hpp"
#include "sdg/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Synthetic part-inspection data generation and evaluation bench"};
  app.require_subcommand(1);
  app.fallthrough();  // global options may follow the subcommand

  std::string config_path;
  std::string out_dir;
  std::string seed_str;
  int workers = 0;
  bool micro = false;
  app.add_option("--config", config_path, "Run-configuration JSON file");
  app.add_option("--out", out_dir, "Output directory (overrides the config)");
  app.add_option("--seed", seed_str, "Master seed (overrides the config)");
  app.add_option("--workers", workers, "Worker threads for generation (overrides the config)");
  app.add_flag("--micro", micro, "Scale the run down to the 20-image smoke configuration");

  std::string predictions;
  std::string manifest_path;
  std::string split = "val";

  CLI::App* cmd_generate = app.add_subcommand("generate", "Generate the synthetic training dataset");
  CLI::App* cmd_pseudo = app.add_subcommand("pseudo-real", "Generate the held-out pseudo-real set");
  CLI::App* cmd_train = app.add_subcommand("train", "Train the classifier on the train split");
  CLI::App* cmd_eval_cls = app.add_subcommand("eval-classify", "Classification report from predictions");
  cmd_eval_cls->add_option("--predictions", predictions,
                           "File of '<plan_id> <pass|fail>' lines; omit to run the trained model");
  cmd_eval_cls->add_option("--manifest", manifest_path,
                           "Manifest to score against (default: the pseudo-real manifest)");
  CLI::App* cmd_eval_det = app.add_subcommand("eval-detect", "Detection metrics from YOLO predictions");
  cmd_eval_det->add_option("--predictions", predictions,
                           "Directory of YOLO prediction files with confidence column")->required();
  cmd_eval_det->add_option("--split", split, "Dataset split to score (default val)");
  CLI::App* cmd_experiment = app.add_subcommand("experiment", "Run the few-shot comparison grid");
  CLI::App* cmd_all = app.add_subcommand("all", "generate, pseudo-real, train, experiment in sequence");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : static_cast<int>(sdg::Errc::usage);
  }

  try {
    sdg::RunConfig config = config_path.empty() ? sdg::default_config() : sdg::parse_config(config_path);
    if (micro) config = sdg::micro_config(config);
    if (!out_dir.empty()) config.output_dir = out_dir;
    if (!seed_str.empty()) {
      config.master_seed = std::stoull(seed_str);
      sdg::propagate_seed(config);
    }
    if (workers > 0) config.workers = workers;

    std::string command;
    for (const auto* cmd : {cmd_generate, cmd_pseudo, cmd_train, cmd_eval_cls, cmd_eval_det,
                            cmd_experiment, cmd_all})
      if (cmd->parsed()) command = cmd->get_name();

    return sdg::dispatch(command, config, predictions, split, manifest_path);
  } catch (const sdg::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
