#include "sdg/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>

#include "sdg/png_io.hpp"

namespace sdg {

namespace {

std::string image_rel_path(const std::string& split, Label label, int plan_id) {
  return split + "/" + to_string(label) + "/" + std::to_string(plan_id) + ".png";
}

std::string label_rel_path(const std::string& split, Label label, int plan_id) {
  return split + "/" + to_string(label) + "/" + std::to_string(plan_id) + ".txt";
}

}  // namespace

void SceneConfig::validate() const {
  require(canvas >= 64, Errc::domain, "canvas too small");
  require(focal_length_px > 0.0, Errc::domain, "focal length must be positive");
  require(light_extent_mm > 0.0, Errc::domain, "light extent must be positive");
  require(light_samples >= 1, Errc::domain, "light sample count must be >= 1");
  require(placement_margin_px >= 0 && placement_margin_px < canvas / 2, Errc::domain,
          "placement margin out of range");
  Material m;
  m.base_color = base_color;
  m.metallic = metallic;
  m.roughness = 0.5;
  m.validate();
}

Camera make_camera(const SceneConfig& scene) {
  return Camera::look_at(scene.camera_eye, scene.camera_target, scene.camera_up, scene.focal_length_px,
                         scene.canvas, scene.canvas);
}

AreaLight make_light(const SceneConfig& scene, double power_watts) {
  AreaLight light;
  light.center = scene.light_center;
  light.extent_w = scene.light_extent_mm;
  light.extent_h = scene.light_extent_mm;
  light.power_watts = power_watts;
  light.sample_count = scene.light_samples;
  return light;
}

Material make_material(const SceneConfig& scene, double roughness) {
  Material m;
  m.base_color = scene.base_color;
  m.roughness = roughness;
  m.metallic = scene.metallic;
  return m;
}

Sprite render_part_sprite(const PartConfig& config, const SceneConfig& scene) {
  scene.validate();
  const TriangleMesh mesh = build_part_mesh(make_bend_spec(config.bend_angle_deg, scene.bracket), scene.bracket);
  const Sprite full = render_sprite(mesh, make_camera(scene), make_light(scene, config.power_watts),
                                    make_material(scene, config.roughness), scene.canvas, scene.canvas);
  return tight_crop(full, 2);
}

AugmentedSprite augment_sprite(const CompositePlan& plan, const Sprite& sprite, const SceneConfig& scene) {
  Rng rng(plan.derived_seed);
  AugmentedSprite out;
  out.params.rotation_deg = rng.uniform(-30.0, 30.0);
  static constexpr int kKernels[3] = {1, 3, 5};
  out.params.blur_kernel = kKernels[rng.uniform_index(3)];
  out.params.brightness_delta = rng.uniform(0.0, 50.0);
  out.rotated = rotate_sprite(sprite, out.params.rotation_deg);

  const BBox box = bbox_from_mask(out.rotated.coverage);
  const int margin = scene.placement_margin_px;
  const int lo_x = margin - box.x_min;
  const int hi_x = scene.canvas - margin - box.x_max;
  const int lo_y = margin - box.y_min;
  const int hi_y = scene.canvas - margin - box.y_max;
  require(hi_x >= lo_x && hi_y >= lo_y, Errc::frame, "rotated sprite too large for the canvas margins");
  out.params.place_x = lo_x + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(hi_x - lo_x + 1)));
  out.params.place_y = lo_y + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(hi_y - lo_y + 1)));
  out.params.validate();
  return out;
}

void run_parallel(std::size_t count, int workers, const std::function<void(std::size_t)>& fn) {
  workers = std::max(1, workers);
  if (workers == 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto body = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) pool.emplace_back(body);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

GenerateResult execute_dataset_job(const DatasetJob& job) {
  job.scene.validate();
  require(job.plans.size() == job.splits.size(), Errc::domain, "split list must match plan list");

  // Distinct part configurations, rendered once each.
  std::map<int, std::size_t> config_slot;  // config_id -> sprite index
  std::vector<const PartConfig*> distinct_configs;
  for (const auto& plan : job.plans)
    if (config_slot.emplace(plan.part.config_id, distinct_configs.size()).second)
      distinct_configs.push_back(&plan.part);
  std::vector<Sprite> sprites(distinct_configs.size());
  run_parallel(distinct_configs.size(), job.workers, [&](std::size_t i) {
    sprites[i] = render_part_sprite(*distinct_configs[i], job.scene);
  });

  // Exposure-adjusted background cache keyed by (background id, exposure index).
  std::map<std::pair<int, int>, Background> adjusted;
  for (const auto& plan : job.plans) {
    const auto key = std::make_pair(plan.background_id, plan.exposure_index);
    if (adjusted.count(key)) continue;
    const auto it = job.backgrounds.find(plan.background_id);
    require(it != job.backgrounds.end(), Errc::domain,
            "no background with id " + std::to_string(plan.background_id));
    require(it->second.rgb.width == job.scene.canvas && it->second.rgb.height == job.scene.canvas,
            Errc::domain, "background size does not match the canvas");
    adjusted.emplace(key, exposure_adjust(it->second, plan.exposure_level));
  }

  // Per-split/label directories up front; workers only create files.
  std::set<std::string> dirs;
  for (std::size_t i = 0; i < job.plans.size(); ++i)
    dirs.insert(job.splits[i] + "/" + to_string(job.plans[i].part.label));
  for (const auto& d : dirs) std::filesystem::create_directories(job.out_dir / d);

  GenerateResult result;
  result.records.assign(job.plans.size(), ManifestRecord{});
  std::vector<std::uint8_t> failed(job.plans.size(), 0);
  std::atomic<std::size_t> failure_count{0};

  run_parallel(job.plans.size(), job.workers, [&](std::size_t i) {
    const CompositePlan& plan = job.plans[i];
    const Sprite& sprite = sprites[config_slot.at(plan.part.config_id)];

    const AugmentedSprite aug = augment_sprite(plan, sprite, job.scene);
    const AugmentParams& params = aug.params;

    const Background& bg = adjusted.at(std::make_pair(plan.background_id, plan.exposure_index));
    CompositeImage image = composite(aug.rotated, bg, params.place_x, params.place_y);
    if (image.mask.count() == 0) {
      failed[i] = 1;
      failure_count.fetch_add(1);
      return;
    }
    image.plan = plan;
    image.params = params;

    const BBox box = bbox_from_mask(image.mask);
    const ImageU8 final_rgb = finalize(image.rgb, params.blur_kernel, params.brightness_delta);

    ManifestRecord rec;
    rec.plan_id = plan.plan_id;
    rec.label = plan.part.label;
    rec.split = job.splits[i];
    rec.image_path = image_rel_path(rec.split, rec.label, plan.plan_id);
    rec.label_path = label_rel_path(rec.split, rec.label, plan.plan_id);
    rec.bend_angle_deg = plan.part.bend_angle_deg;
    rec.roughness = plan.part.roughness;
    rec.power_watts = plan.part.power_watts;
    rec.background_id = plan.background_id;
    rec.exposure_level = plan.exposure_level;
    rec.augment = params;
    rec.derived_seed = plan.derived_seed;
    rec.bbox = box;
    rec.content_hash = content_hash(final_rgb);

    write_png(job.out_dir / rec.image_path, final_rgb);
    Annotation ann{box, rec.label, rec.image_path, 1.0};
    std::ofstream label_out(job.out_dir / rec.label_path);
    require(label_out.good(), Errc::io, "cannot write label file: " + rec.label_path);
    label_out << to_yolo_line(ann, final_rgb.width, final_rgb.height) << "\n";
    label_out.flush();
    require(label_out.good(), Errc::io, "label write failed: " + rec.label_path);

    result.records[i] = std::move(rec);
  });

  // Drop failed plans, keep order.
  if (failure_count.load() > 0) {
    std::vector<ManifestRecord> kept;
    kept.reserve(result.records.size());
    for (std::size_t i = 0; i < result.records.size(); ++i)
      if (!failed[i]) kept.push_back(std::move(result.records[i]));
    result.records = std::move(kept);
  }
  result.failed_plans = failure_count.load();
  result.manifest_path = job.out_dir / "manifest.jsonl";
  result.summary_path = job.out_dir / "summary.json";
  write_manifest(result.records, result.manifest_path, result.summary_path, result.failed_plans);
  result.summary = compute_summary(result.records, result.failed_plans);
  return result;
}

GenerateResult generate_dataset(const DOESpec& doe, const SceneConfig& scene,
                                const std::filesystem::path& out_dir, int workers, double val_fraction,
                                const std::filesystem::path& background_dir) {
  doe.validate();
  const std::vector<PartConfig> configs = enumerate_part_configs(doe);
  DatasetJob job;
  job.plans = enumerate_composite_plans(doe, configs);
  job.scene = scene;
  job.out_dir = out_dir;
  job.workers = workers;

  std::vector<Label> labels(job.plans.size());
  for (std::size_t i = 0; i < job.plans.size(); ++i) labels[i] = job.plans[i].part.label;
  job.splits = assign_splits(labels, val_fraction, doe.master_seed);

  if (background_dir.empty()) {
    for (int id : doe.background_ids)
      job.backgrounds.emplace(id, make_procedural_background(id, doe.master_seed, scene.canvas, scene.canvas));
  } else {
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(background_dir))
      if (entry.is_regular_file() && entry.path().extension() == ".png") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    require(!files.empty(), Errc::io, "no .png backgrounds in " + background_dir.string());
    for (int id : doe.background_ids) {
      require(id >= 0 && static_cast<std::size_t>(id) < files.size(), Errc::config_invalid,
              "background id " + std::to_string(id) + " has no file in " + background_dir.string());
      job.backgrounds.emplace(id, load_background_file(files[static_cast<std::size_t>(id)], id, scene.canvas,
                                                       scene.canvas));
    }
  }
  return execute_dataset_job(job);
}

AuditResult audit_dataset(const std::vector<ManifestRecord>& records, const SceneConfig& scene,
                          const AngleClassSpec& class_spec, int workers) {
  class_spec.validate();
  AuditResult audit;
  audit.checked = records.size();

  // Coverage depends only on geometry, so one sprite per distinct bend angle
  // is enough to re-derive every bounding box.
  std::vector<double> angles;
  for (const auto& r : records)
    if (std::find(angles.begin(), angles.end(), r.bend_angle_deg) == angles.end())
      angles.push_back(r.bend_angle_deg);
  std::map<double, Sprite> sprites;
  for (double a : angles) sprites.emplace(a, Sprite{});
  run_parallel(angles.size(), workers, [&](std::size_t i) {
    PartConfig config;
    config.bend_angle_deg = angles[i];
    sprites.at(angles[i]) = render_part_sprite(config, scene);
  });

  std::atomic<std::size_t> label_bad{0}, bbox_bad{0};
  std::mutex detail_mutex;
  run_parallel(records.size(), workers, [&](std::size_t i) {
    const ManifestRecord& r = records[i];
    if (classify_angle(r.bend_angle_deg, class_spec) != r.label) {
      label_bad.fetch_add(1);
      std::lock_guard<std::mutex> lock(detail_mutex);
      if (audit.details.size() < 10)
        audit.details.push_back("plan " + std::to_string(r.plan_id) + ": label does not match angle " +
                                std::to_string(r.bend_angle_deg));
      return;
    }
    const Sprite rotated = rotate_sprite(sprites.at(r.bend_angle_deg), r.augment.rotation_deg);
    const BBox tight = bbox_from_mask(rotated.coverage);
    const BBox expected{tight.x_min + r.augment.place_x, tight.y_min + r.augment.place_y,
                        tight.x_max + r.augment.place_x, tight.y_max + r.augment.place_y};
    if (expected.x_min != r.bbox.x_min || expected.y_min != r.bbox.y_min || expected.x_max != r.bbox.x_max ||
        expected.y_max != r.bbox.y_max) {
      bbox_bad.fetch_add(1);
      std::lock_guard<std::mutex> lock(detail_mutex);
      if (audit.details.size() < 10)
        audit.details.push_back("plan " + std::to_string(r.plan_id) + ": stored bbox is not tight");
    }
  });
  audit.label_mismatches = label_bad.load();
  audit.bbox_mismatches = bbox_bad.load();
  return audit;
}

}  // namespace sdg
