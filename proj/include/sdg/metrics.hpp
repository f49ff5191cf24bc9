#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sdg/annotate.hpp"
#include "sdg/geometry.hpp"

namespace sdg {

// Binary confusion matrix, pass taken as the "positive" production class.
// pass_as_fail is a Type I error (false alarm), fail_as_pass a Type II error
// (missed detection).
struct ConfusionMatrix {
  std::int64_t tp_pass = 0;
  std::int64_t pass_as_fail = 0;
  std::int64_t fail_as_pass = 0;
  std::int64_t tp_fail = 0;

  std::int64_t total() const { return tp_pass + pass_as_fail + fail_as_pass + tp_fail; }
  std::int64_t support_pass() const { return tp_pass + pass_as_fail; }
  std::int64_t support_fail() const { return fail_as_pass + tp_fail; }
};

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::int64_t support = 0;
  bool precision_defined = true;  // false when the class was never predicted
};

struct ClassificationReport {
  ClassMetrics pass_cls;
  ClassMetrics fail_cls;
  double macro_precision = 0, macro_recall = 0, macro_f1 = 0;
  double weighted_precision = 0, weighted_recall = 0, weighted_f1 = 0;
  double accuracy = 0;
  double balanced_accuracy = 0;
};

ConfusionMatrix confusion(const std::vector<Label>& predictions, const std::vector<Label>& truths);
ClassificationReport report(const ConfusionMatrix& cm);

std::string report_text(const ClassificationReport& r);  // aligned-column table
std::string report_json(const ClassificationReport& r, const ConfusionMatrix& cm);

// ---- Detection metrics ----

struct BoxF {
  double x_min = 0, y_min = 0, x_max = 0, y_max = 0;

  static BoxF from(const BBox& b) {
    return {static_cast<double>(b.x_min), static_cast<double>(b.y_min), static_cast<double>(b.x_max),
            static_cast<double>(b.y_max)};
  }
  double area() const { return (x_max > x_min && y_max > y_min) ? (x_max - x_min) * (y_max - y_min) : 0.0; }
};

double iou(const BoxF& a, const BoxF& b);

struct Detection {
  int image_id = 0;
  BoxF box;
  int class_index = 0;
  double confidence = 1.0;
};

struct GroundTruthBox {
  int image_id = 0;
  BoxF box;
  int class_index = 0;
};

struct DetectionSet {
  std::vector<Detection> predictions;
  std::vector<GroundTruthBox> ground_truths;
};

// COCO-style AP: predictions sorted by descending confidence, greedy
// one-to-one matching to the highest-IoU unmatched ground truth at or above
// the threshold, 101-point interpolated precision envelope. nullopt when the
// class has no ground truths.
std::optional<double> average_precision(const DetectionSet& det, int class_index, double iou_threshold);

struct DetectionMetrics {
  double map50 = 0.0;
  double map50_95 = 0.0;
  double precision = 0.0;  // at confidence >= 0.25, IoU 0.5, micro-averaged
  double recall = 0.0;
  bool precision_defined = true;
  std::vector<int> skipped_classes;  // predicted classes with no ground truth
};

DetectionMetrics map_range(const DetectionSet& det);

// Builds a DetectionSet from YOLO-format ground-truth label files and
// prediction files (same stem, confidence appended). Prediction files may be
// missing for images with no detections.
DetectionSet load_detection_set(const std::vector<std::filesystem::path>& gt_label_files,
                                const std::filesystem::path& prediction_dir, int image_w, int image_h);

}  // namespace sdg
