#include "sdg/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace sdg {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

int line_of_offset(const std::string& text, std::size_t offset) {
  int line = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i)
    if (text[i] == '\n') ++line;
  return line;
}

// Best-effort line anchor for a key name (first occurrence of "key").
int line_of_key(const std::string& text, const std::string& key) {
  const std::size_t pos = text.find("\"" + key + "\"");
  return pos == std::string::npos ? 0 : line_of_offset(text, pos);
}

struct ConfigReader {
  const std::string& text;
  const std::string& source;

  [[noreturn]] void error(const std::string& key, const std::string& what) const {
    const int line = line_of_key(text, key);
    fail(Errc::config_invalid,
         source + (line > 0 ? ":" + std::to_string(line) : "") + ": " + what);
  }

  void check_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) const {
    for (const auto& [key, value] : obj.items()) {
      (void)value;
      if (!allowed.count(key))
        error(key, "unknown key '" + key + "' in " + where);
    }
  }

  template <typename T>
  void get(const json& obj, const char* key, T& out) const {
    if (!obj.contains(key)) return;
    try {
      out = obj.at(key).get<T>();
    } catch (const json::exception& e) {
      error(key, std::string("bad value for '") + key + "': " + e.what());
    }
  }

  void get_vec3(const json& obj, const char* key, Vec3& out) const {
    if (!obj.contains(key)) return;
    const auto& a = obj.at(key);
    if (!a.is_array() || a.size() != 3) error(key, std::string("'") + key + "' must be an [x, y, z] array");
    try {
      out = {a.at(0).get<double>(), a.at(1).get<double>(), a.at(2).get<double>()};
    } catch (const json::exception& e) {
      error(key, std::string("bad value for '") + key + "': " + e.what());
    }
  }

  void get_path(const json& obj, const char* key, std::filesystem::path& out) const {
    std::string s = out.string();
    get(obj, key, s);
    out = s;
  }
};

ordered_json vec3_json(const Vec3& v) { return ordered_json::array({v.x, v.y, v.z}); }

}  // namespace

void RunConfig::validate() const {
  require(workers >= 1, Errc::config_invalid, "workers must be >= 1");
  require(!output_dir.empty(), Errc::config_invalid, "output_dir must be set");
  require(val_fraction >= 0.0 && val_fraction < 1.0, Errc::config_invalid, "val_fraction out of [0,1)");
  require(hidden_dim >= 1, Errc::config_invalid, "hidden_dim must be >= 1");
  doe.validate();
  make_class_spec(doe, decision_threshold_deg);  // threshold sits strictly between the classes
  scene.validate();
  pseudo_real.validate_against(doe);
  preprocess.validate();
  train.validate();
  shot_grid.validate();
}

RunConfig default_config() {
  RunConfig config;
  propagate_seed(config);
  return config;
}

RunConfig micro_config(RunConfig base) {
  base.doe.pass_angles_deg = {20.0};
  base.doe.fail_angles_deg = {5.0};
  base.doe.roughness_levels = {0.4};
  base.doe.power_levels = {10.0};
  base.doe.background_ids = {0};
  base.doe.exposure_levels = {1.0};
  base.doe.images_per_config = 10;

  base.pseudo_real.holdout_angles_deg = {7.5, 17.5};
  base.pseudo_real.holdout_roughness = {0.3};
  base.pseudo_real.holdout_power = {12.5};
  base.pseudo_real.background_ids = {1};
  base.pseudo_real.exposure_levels = {0.9};
  base.pseudo_real.pass_count = 18;
  base.pseudo_real.fail_count = 2;

  base.train.epochs = 8;
  base.shot_grid.pass_shots = {2};
  base.shot_grid.fail_shots = {2};
  base.shot_grid.repetitions = 2;
  propagate_seed(base);
  return base;
}

void propagate_seed(RunConfig& config) {
  config.doe.master_seed = config.master_seed;
  config.train.seed = config.master_seed;
  config.shot_grid.base_seed = config.master_seed;
}

RunConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(in.good(), Errc::config_not_found, "configuration file not found: " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str(), path.string());
}

RunConfig parse_config_text(const std::string& text, const std::string& source_name) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(Errc::config_parse, source_name + ":" + std::to_string(line_of_offset(text, e.byte)) + ": " +
                                 e.what());
  }
  require(root.is_object(), Errc::config_parse, source_name + ": top level must be a JSON object");

  const ConfigReader r{text, source_name};
  r.check_keys(root, "the top level",
               {"schema_version", "master_seed", "output_dir", "workers", "doe", "decision_threshold_deg",
                "val_fraction", "scene", "background_dir", "pseudo_real", "preprocess", "train",
                "hidden_dim", "shot_grid"});

  int schema_version = -1;
  if (!root.contains("schema_version"))
    fail(Errc::config_parse, source_name + ": missing required key 'schema_version'");
  r.get(root, "schema_version", schema_version);
  require(schema_version == kConfigSchemaVersion, Errc::config_parse,
          source_name + ": unsupported schema_version " + std::to_string(schema_version) + " (expected " +
              std::to_string(kConfigSchemaVersion) + ")");

  RunConfig config;
  r.get(root, "master_seed", config.master_seed);
  r.get_path(root, "output_dir", config.output_dir);
  r.get(root, "workers", config.workers);
  r.get(root, "decision_threshold_deg", config.decision_threshold_deg);
  r.get(root, "val_fraction", config.val_fraction);
  r.get_path(root, "background_dir", config.background_dir);
  r.get(root, "hidden_dim", config.hidden_dim);
  propagate_seed(config);

  if (root.contains("doe")) {
    const json& doe = root.at("doe");
    r.check_keys(doe, "'doe'",
                 {"pass_angles_deg", "fail_angles_deg", "roughness_levels", "power_levels",
                  "background_ids", "exposure_levels", "images_per_config"});
    r.get(doe, "pass_angles_deg", config.doe.pass_angles_deg);
    r.get(doe, "fail_angles_deg", config.doe.fail_angles_deg);
    r.get(doe, "roughness_levels", config.doe.roughness_levels);
    r.get(doe, "power_levels", config.doe.power_levels);
    r.get(doe, "background_ids", config.doe.background_ids);
    r.get(doe, "exposure_levels", config.doe.exposure_levels);
    r.get(doe, "images_per_config", config.doe.images_per_config);
  }

  if (root.contains("scene")) {
    const json& scene = root.at("scene");
    r.check_keys(scene, "'scene'",
                 {"canvas", "focal_length_px", "camera_eye", "camera_target", "camera_up", "light_center",
                  "light_extent_mm", "light_samples", "base_color", "metallic", "placement_margin_px",
                  "bracket"});
    r.get(scene, "canvas", config.scene.canvas);
    r.get(scene, "focal_length_px", config.scene.focal_length_px);
    r.get_vec3(scene, "camera_eye", config.scene.camera_eye);
    r.get_vec3(scene, "camera_target", config.scene.camera_target);
    r.get_vec3(scene, "camera_up", config.scene.camera_up);
    r.get_vec3(scene, "light_center", config.scene.light_center);
    r.get(scene, "light_extent_mm", config.scene.light_extent_mm);
    r.get(scene, "light_samples", config.scene.light_samples);
    r.get_vec3(scene, "base_color", config.scene.base_color);
    r.get(scene, "metallic", config.scene.metallic);
    r.get(scene, "placement_margin_px", config.scene.placement_margin_px);
    if (scene.contains("bracket")) {
      const json& b = scene.at("bracket");
      r.check_keys(b, "'scene.bracket'",
                   {"plate_w", "plate_d", "plate_t", "wall_w", "wall_h", "wall_t", "tab_w", "tab_len",
                    "tab_t", "tab_skirt"});
      r.get(b, "plate_w", config.scene.bracket.plate_w);
      r.get(b, "plate_d", config.scene.bracket.plate_d);
      r.get(b, "plate_t", config.scene.bracket.plate_t);
      r.get(b, "wall_w", config.scene.bracket.wall_w);
      r.get(b, "wall_h", config.scene.bracket.wall_h);
      r.get(b, "wall_t", config.scene.bracket.wall_t);
      r.get(b, "tab_w", config.scene.bracket.tab_w);
      r.get(b, "tab_len", config.scene.bracket.tab_len);
      r.get(b, "tab_t", config.scene.bracket.tab_t);
      r.get(b, "tab_skirt", config.scene.bracket.tab_skirt);
    }
  }

  if (root.contains("pseudo_real")) {
    const json& p = root.at("pseudo_real");
    r.check_keys(p, "'pseudo_real'",
                 {"holdout_angles_deg", "holdout_roughness", "holdout_power", "background_ids",
                  "exposure_levels", "pass_count", "fail_count"});
    r.get(p, "holdout_angles_deg", config.pseudo_real.holdout_angles_deg);
    r.get(p, "holdout_roughness", config.pseudo_real.holdout_roughness);
    r.get(p, "holdout_power", config.pseudo_real.holdout_power);
    r.get(p, "background_ids", config.pseudo_real.background_ids);
    r.get(p, "exposure_levels", config.pseudo_real.exposure_levels);
    r.get(p, "pass_count", config.pseudo_real.pass_count);
    r.get(p, "fail_count", config.pseudo_real.fail_count);
  }

  if (root.contains("preprocess")) {
    const json& p = root.at("preprocess");
    r.check_keys(p, "'preprocess'",
                 {"crop_size", "channel_mean", "channel_std", "flip_prob", "jitter_brightness",
                  "jitter_contrast"});
    r.get(p, "crop_size", config.preprocess.crop_size);
    r.get(p, "channel_mean", config.preprocess.channel_mean);
    r.get(p, "channel_std", config.preprocess.channel_std);
    r.get(p, "flip_prob", config.preprocess.flip_prob);
    r.get(p, "jitter_brightness", config.preprocess.jitter_brightness);
    r.get(p, "jitter_contrast", config.preprocess.jitter_contrast);
  }

  if (root.contains("train")) {
    const json& t = root.at("train");
    r.check_keys(t, "'train'",
                 {"batch_size", "learning_rate", "beta1", "beta2", "epsilon", "weight_decay", "epochs",
                  "seed"});
    r.get(t, "batch_size", config.train.batch_size);
    r.get(t, "learning_rate", config.train.learning_rate);
    r.get(t, "beta1", config.train.beta1);
    r.get(t, "beta2", config.train.beta2);
    r.get(t, "epsilon", config.train.epsilon);
    r.get(t, "weight_decay", config.train.weight_decay);
    r.get(t, "epochs", config.train.epochs);
    r.get(t, "seed", config.train.seed);
  }

  if (root.contains("shot_grid")) {
    const json& g = root.at("shot_grid");
    r.check_keys(g, "'shot_grid'", {"pass_shots", "fail_shots", "repetitions", "base_seed"});
    r.get(g, "pass_shots", config.shot_grid.pass_shots);
    r.get(g, "fail_shots", config.shot_grid.fail_shots);
    r.get(g, "repetitions", config.shot_grid.repetitions);
    r.get(g, "base_seed", config.shot_grid.base_seed);
  }

  config.doe.master_seed = config.master_seed;
  try {
    config.validate();
  } catch (const Error& e) {
    if (e.code() == Errc::config_invalid || e.code() == Errc::spec_overlap) throw;
    fail(Errc::config_invalid, source_name + ": " + e.what());
  }
  return config;
}

std::string serialize_config(const RunConfig& c) {
  ordered_json j;
  j["schema_version"] = kConfigSchemaVersion;
  j["master_seed"] = c.master_seed;
  j["output_dir"] = c.output_dir.string();
  j["workers"] = c.workers;
  j["doe"] = {{"pass_angles_deg", c.doe.pass_angles_deg},
              {"fail_angles_deg", c.doe.fail_angles_deg},
              {"roughness_levels", c.doe.roughness_levels},
              {"power_levels", c.doe.power_levels},
              {"background_ids", c.doe.background_ids},
              {"exposure_levels", c.doe.exposure_levels},
              {"images_per_config", c.doe.images_per_config}};
  j["decision_threshold_deg"] = c.decision_threshold_deg;
  j["val_fraction"] = c.val_fraction;
  j["scene"] = {{"canvas", c.scene.canvas},
                {"focal_length_px", c.scene.focal_length_px},
                {"camera_eye", vec3_json(c.scene.camera_eye)},
                {"camera_target", vec3_json(c.scene.camera_target)},
                {"camera_up", vec3_json(c.scene.camera_up)},
                {"light_center", vec3_json(c.scene.light_center)},
                {"light_extent_mm", c.scene.light_extent_mm},
                {"light_samples", c.scene.light_samples},
                {"base_color", vec3_json(c.scene.base_color)},
                {"metallic", c.scene.metallic},
                {"placement_margin_px", c.scene.placement_margin_px},
                {"bracket",
                 {{"plate_w", c.scene.bracket.plate_w},
                  {"plate_d", c.scene.bracket.plate_d},
                  {"plate_t", c.scene.bracket.plate_t},
                  {"wall_w", c.scene.bracket.wall_w},
                  {"wall_h", c.scene.bracket.wall_h},
                  {"wall_t", c.scene.bracket.wall_t},
                  {"tab_w", c.scene.bracket.tab_w},
                  {"tab_len", c.scene.bracket.tab_len},
                  {"tab_t", c.scene.bracket.tab_t},
                  {"tab_skirt", c.scene.bracket.tab_skirt}}}};
  j["background_dir"] = c.background_dir.string();
  j["pseudo_real"] = {{"holdout_angles_deg", c.pseudo_real.holdout_angles_deg},
                      {"holdout_roughness", c.pseudo_real.holdout_roughness},
                      {"holdout_power", c.pseudo_real.holdout_power},
                      {"background_ids", c.pseudo_real.background_ids},
                      {"exposure_levels", c.pseudo_real.exposure_levels},
                      {"pass_count", c.pseudo_real.pass_count},
                      {"fail_count", c.pseudo_real.fail_count}};
  j["preprocess"] = {{"crop_size", c.preprocess.crop_size},
                     {"channel_mean", c.preprocess.channel_mean},
                     {"channel_std", c.preprocess.channel_std},
                     {"flip_prob", c.preprocess.flip_prob},
                     {"jitter_brightness", c.preprocess.jitter_brightness},
                     {"jitter_contrast", c.preprocess.jitter_contrast}};
  j["train"] = {{"batch_size", c.train.batch_size},
                {"learning_rate", c.train.learning_rate},
                {"beta1", c.train.beta1},
                {"beta2", c.train.beta2},
                {"epsilon", c.train.epsilon},
                {"weight_decay", c.train.weight_decay},
                {"epochs", c.train.epochs},
                {"seed", c.train.seed}};
  j["hidden_dim"] = c.hidden_dim;
  j["shot_grid"] = {{"pass_shots", c.shot_grid.pass_shots},
                    {"fail_shots", c.shot_grid.fail_shots},
                    {"repetitions", c.shot_grid.repetitions},
                    {"base_seed", c.shot_grid.base_seed}};
  return j.dump(2);
}

std::uint64_t config_hash(const RunConfig& config) {
  const std::string canonical = serialize_config(config);
  return fnv1a64(canonical.data(), canonical.size());
}

}  // namespace sdg
