#include "sdg/annotate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "sdg/rng.hpp"

namespace sdg {

namespace {

std::string format_norm(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

nlohmann::ordered_json record_to_json(const ManifestRecord& r) {
  nlohmann::ordered_json j;
  j["plan_id"] = r.plan_id;
  j["image"] = r.image_path;
  j["label_file"] = r.label_path;
  j["label"] = to_string(r.label);
  j["bend_angle_deg"] = r.bend_angle_deg;
  j["roughness"] = r.roughness;
  j["power_watts"] = r.power_watts;
  j["background_id"] = r.background_id;
  j["exposure_level"] = r.exposure_level;
  j["rotation_deg"] = r.augment.rotation_deg;
  j["blur_kernel"] = r.augment.blur_kernel;
  j["brightness_delta"] = r.augment.brightness_delta;
  j["place_x"] = r.augment.place_x;
  j["place_y"] = r.augment.place_y;
  j["derived_seed"] = r.derived_seed;
  j["split"] = r.split;
  j["bbox"] = {r.bbox.x_min, r.bbox.y_min, r.bbox.x_max, r.bbox.y_max};
  j["content_hash"] = r.content_hash;
  return j;
}

ManifestRecord record_from_json(const nlohmann::json& j) {
  ManifestRecord r;
  r.plan_id = j.at("plan_id").get<int>();
  r.image_path = j.at("image").get<std::string>();
  r.label_path = j.at("label_file").get<std::string>();
  r.label = label_from_string(j.at("label").get<std::string>());
  r.bend_angle_deg = j.at("bend_angle_deg").get<double>();
  r.roughness = j.at("roughness").get<double>();
  r.power_watts = j.at("power_watts").get<double>();
  r.background_id = j.at("background_id").get<int>();
  r.exposure_level = j.at("exposure_level").get<double>();
  r.augment.rotation_deg = j.at("rotation_deg").get<double>();
  r.augment.blur_kernel = j.at("blur_kernel").get<int>();
  r.augment.brightness_delta = j.at("brightness_delta").get<double>();
  r.augment.place_x = j.at("place_x").get<int>();
  r.augment.place_y = j.at("place_y").get<int>();
  r.derived_seed = j.at("derived_seed").get<std::uint64_t>();
  r.split = j.at("split").get<std::string>();
  const auto& b = j.at("bbox");
  r.bbox = {b.at(0).get<int>(), b.at(1).get<int>(), b.at(2).get<int>(), b.at(3).get<int>()};
  r.content_hash = j.at("content_hash").get<std::uint64_t>();
  return r;
}

}  // namespace

void BBox::validate(int image_w, int image_h) const {
  require(x_min < x_max && y_min < y_max, Errc::annotation, "bounding box has non-positive extent");
  require(x_min >= 0 && y_min >= 0 && x_max <= image_w && y_max <= image_h, Errc::annotation,
          "bounding box outside image bounds");
}

BBox bbox_from_mask(const Mask& mask) {
  BBox box;
  bool found = false;
  for (int y = 0; y < mask.height; ++y)
    for (int x = 0; x < mask.width; ++x)
      if (mask.at(x, y)) {
        if (!found) {
          box = {x, y, x + 1, y + 1};
          found = true;
        } else {
          box.x_min = std::min(box.x_min, x);
          box.y_min = std::min(box.y_min, y);
          box.x_max = std::max(box.x_max, x + 1);
          box.y_max = std::max(box.y_max, y + 1);
        }
      }
  require(found, Errc::annotation, "cannot derive a bounding box from an empty mask");
  return box;
}

std::string to_yolo_line(const Annotation& ann, int image_w, int image_h) {
  ann.bbox.validate(image_w, image_h);
  const double cx = (ann.bbox.x_min + ann.bbox.x_max) / 2.0 / image_w;
  const double cy = (ann.bbox.y_min + ann.bbox.y_max) / 2.0 / image_h;
  const double w = static_cast<double>(ann.bbox.width()) / image_w;
  const double h = static_cast<double>(ann.bbox.height()) / image_h;
  return std::to_string(static_cast<int>(ann.label)) + " " + format_norm(cx) + " " + format_norm(cy) + " " +
         format_norm(w) + " " + format_norm(h);
}

YoloBox parse_yolo_line(const std::string& line) {
  std::istringstream in(line);
  YoloBox box;
  double conf;
  if (!(in >> box.class_index >> box.cx >> box.cy >> box.w >> box.h))
    fail(Errc::io, "malformed YOLO line: '" + line + "'");
  if (in >> conf) box.confidence = conf;
  return box;
}

PixelBox to_pixel_box(const YoloBox& box, int image_w, int image_h) {
  PixelBox p;
  p.x_min = (box.cx - box.w / 2.0) * image_w;
  p.x_max = (box.cx + box.w / 2.0) * image_w;
  p.y_min = (box.cy - box.h / 2.0) * image_h;
  p.y_max = (box.cy + box.h / 2.0) * image_h;
  return p;
}

ManifestSummary compute_summary(const std::vector<ManifestRecord>& records, std::size_t failed_plans) {
  ManifestSummary s;
  s.total = records.size();
  s.failed_plans = failed_plans;
  for (const auto& r : records) {
    ++s.per_split[r.split];
    ++s.per_label[to_string(r.label)];
    ++s.per_split_label[r.split + "/" + to_string(r.label)];
  }
  return s;
}

void write_manifest(const std::vector<ManifestRecord>& records, const std::filesystem::path& manifest_path,
                    const std::filesystem::path& summary_path, std::size_t failed_plans) {
  std::ofstream out(manifest_path);
  require(out.good(), Errc::io, "cannot open for writing: " + manifest_path.string());
  for (const auto& r : records) out << record_to_json(r).dump() << "\n";
  out.flush();
  require(out.good(), Errc::io, "write failed: " + manifest_path.string());

  const ManifestSummary s = compute_summary(records, failed_plans);
  nlohmann::ordered_json j;
  j["total"] = s.total;
  j["failed_plans"] = s.failed_plans;
  j["per_split"] = s.per_split;
  j["per_label"] = s.per_label;
  j["per_split_label"] = s.per_split_label;
  std::ofstream sum(summary_path);
  require(sum.good(), Errc::io, "cannot open for writing: " + summary_path.string());
  sum << j.dump(2) << "\n";
  sum.flush();
  require(sum.good(), Errc::io, "write failed: " + summary_path.string());
}

std::vector<ManifestRecord> read_manifest(const std::filesystem::path& manifest_path) {
  std::ifstream in(manifest_path);
  require(in.good(), Errc::io, "cannot open manifest: " + manifest_path.string());
  std::vector<ManifestRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      records.push_back(record_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      fail(Errc::io, manifest_path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return records;
}

std::vector<std::string> assign_splits(const std::vector<Label>& labels, double val_fraction,
                                       std::uint64_t seed) {
  require(val_fraction >= 0.0 && val_fraction < 1.0, Errc::domain, "val fraction out of [0, 1)");
  std::vector<std::string> splits(labels.size(), "train");
  for (Label which : {Label::pass, Label::fail}) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == which) idx.push_back(i);
    Rng rng(derive_seed(seed, {0x5911u, static_cast<std::uint64_t>(which)}));
    for (std::size_t i = idx.size(); i > 1; --i)
      std::swap(idx[i - 1], idx[rng.uniform_index(i)]);
    const auto n_val = static_cast<std::size_t>(std::floor(static_cast<double>(idx.size()) * val_fraction + 0.5));
    for (std::size_t i = 0; i < n_val; ++i) splits[idx[i]] = "val";
  }
  return splits;
}

}  // namespace sdg
