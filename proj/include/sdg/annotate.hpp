#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sdg/composite.hpp"
#include "sdg/image.hpp"

namespace sdg {

// Axis-aligned pixel box, half-open on the max edges.
struct BBox {
  int x_min = 0, y_min = 0, x_max = 0, y_max = 0;

  int width() const { return x_max - x_min; }
  int height() const { return y_max - y_min; }
  void validate(int image_w, int image_h) const;
};

struct Annotation {
  BBox bbox;
  Label label = Label::pass;
  std::string image_path;
  double confidence = 1.0;  // always 1 for ground truth
};

// One line of the provenance manifest; everything needed to reproduce the
// image from the run configuration.
struct ManifestRecord {
  int plan_id = 0;
  std::string image_path;  // relative to the dataset root
  std::string label_path;
  Label label = Label::pass;
  double bend_angle_deg = 0.0;
  double roughness = 0.0;
  double power_watts = 0.0;
  int background_id = 0;
  double exposure_level = 1.0;
  AugmentParams augment;
  std::uint64_t derived_seed = 0;
  std::string split;  // train | val | pseudo_real
  BBox bbox;
  std::uint64_t content_hash = 0;
};

struct ManifestSummary {
  std::size_t total = 0;
  std::map<std::string, std::size_t> per_split;
  std::map<std::string, std::size_t> per_label;
  std::map<std::string, std::size_t> per_split_label;  // "split/label"
  std::size_t failed_plans = 0;
};

// Tight box over all true pixels. Empty mask -> annotation error.
BBox bbox_from_mask(const Mask& mask);

// "<class_index> <cx> <cy> <w> <h>", normalized to [0,1], 6 decimals.
// class_index: pass = 0, fail = 1.
std::string to_yolo_line(const Annotation& ann, int image_w, int image_h);

struct YoloBox {
  int class_index = 0;
  double cx = 0, cy = 0, w = 0, h = 0;  // normalized
  std::optional<double> confidence;     // present in prediction files
};

YoloBox parse_yolo_line(const std::string& line);

// Denormalized pixel-space corners (continuous, half-open convention).
struct PixelBox {
  double x_min = 0, y_min = 0, x_max = 0, y_max = 0;
};
PixelBox to_pixel_box(const YoloBox& box, int image_w, int image_h);

ManifestSummary compute_summary(const std::vector<ManifestRecord>& records, std::size_t failed_plans = 0);

// JSON-lines manifest with fixed key order plus a JSON summary alongside.
void write_manifest(const std::vector<ManifestRecord>& records, const std::filesystem::path& manifest_path,
                    const std::filesystem::path& summary_path, std::size_t failed_plans = 0);
std::vector<ManifestRecord> read_manifest(const std::filesystem::path& manifest_path);

// Deterministic stratified train/val split: per label, a seeded shuffle of
// record positions, the first val_fraction going to "val".
std::vector<std::string> assign_splits(const std::vector<Label>& labels, double val_fraction,
                                       std::uint64_t seed);

}  // namespace sdg
