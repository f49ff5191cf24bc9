#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "sdg/annotate.hpp"
#include "sdg/composite.hpp"
#include "sdg/doe.hpp"
#include "sdg/render.hpp"

namespace sdg {

// Fixed virtual inspection station: camera, area light placement and part
// material. Declared in configuration, never inferred. Geometry in mm; the
// camera sits above-front of the part, the light up-front so tab brightness
// tracks the bend angle.
struct SceneConfig {
  int canvas = 640;
  double focal_length_px = 1600.0;
  Vec3 camera_eye{140.0, -420.0, 320.0};
  Vec3 camera_target{0.0, 0.0, 18.0};
  Vec3 camera_up{0.0, 0.0, 1.0};
  Vec3 light_center{-120.0, -260.0, 600.0};
  double light_extent_mm = 220.0;
  int light_samples = 16;
  Vec3 base_color{0.60, 0.60, 0.63};
  double metallic = 1.0;
  BracketDims bracket;
  int placement_margin_px = 8;

  void validate() const;
};

Camera make_camera(const SceneConfig& scene);
AreaLight make_light(const SceneConfig& scene, double power_watts);
Material make_material(const SceneConfig& scene, double roughness);

// Renders one part configuration and crops to coverage. Pure function of its
// arguments.
Sprite render_part_sprite(const PartConfig& config, const SceneConfig& scene);

// Augmentation draw + sprite rotation for one plan. Consumes only the plan's
// derived seed; draw order: rotation, blur kernel, brightness, placement x,
// placement y. Placement keeps the rotated coverage at least
// placement_margin_px from every canvas border.
struct AugmentedSprite {
  AugmentParams params;
  Sprite rotated;
};
AugmentedSprite augment_sprite(const CompositePlan& plan, const Sprite& sprite, const SceneConfig& scene);

struct DatasetJob {
  std::vector<CompositePlan> plans;
  std::vector<std::string> splits;            // one per plan
  std::map<int, Background> backgrounds;      // keyed by background id, pre-exposure
  SceneConfig scene;
  std::filesystem::path out_dir;
  int workers = 1;
};

struct GenerateResult {
  std::vector<ManifestRecord> records;
  ManifestSummary summary;
  std::filesystem::path manifest_path;
  std::filesystem::path summary_path;
  std::size_t failed_plans = 0;
};

// Materializes every plan: render (cached per part config), augment,
// composite, finalize, write PNG + YOLO label, then the manifest in plan
// order. Output is byte-identical for any worker count.
GenerateResult execute_dataset_job(const DatasetJob& job);

// Synthetic training set for a DOE: procedural (or user-directory)
// backgrounds, stratified train/val splits.
GenerateResult generate_dataset(const DOESpec& doe, const SceneConfig& scene,
                                const std::filesystem::path& out_dir, int workers,
                                double val_fraction = 0.1,
                                const std::filesystem::path& background_dir = {});

// Shared worker-pool helper: runs fn(index) over [0, count) with dynamic
// scheduling; rethrows the first worker exception.
void run_parallel(std::size_t count, int workers, const std::function<void(std::size_t)>& fn);

// Recomputes every record's geometry through the deterministic pipeline and
// checks label consistency and bounding-box tightness.
struct AuditResult {
  std::size_t checked = 0;
  std::size_t label_mismatches = 0;
  std::size_t bbox_mismatches = 0;
  std::vector<std::string> details;  // first few offending records
};

AuditResult audit_dataset(const std::vector<ManifestRecord>& records, const SceneConfig& scene,
                          const AngleClassSpec& class_spec, int workers = 1);

}  // namespace sdg
