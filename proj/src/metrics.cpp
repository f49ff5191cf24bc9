#include "sdg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "sdg/common.hpp"

namespace sdg {

namespace {

double safe_div(double num, double den) { return den > 0.0 ? num / den : 0.0; }

double f1_of(double precision, double recall) {
  return (precision + recall) > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
}

std::string fmt3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

// Cumulative precision/recall along the confidence-ranked prediction list.
struct PrCurve {
  std::vector<double> precision;
  std::vector<double> recall;
  std::int64_t n_gt = 0;
  std::int64_t tp_total = 0;
};

PrCurve pr_curve(const DetectionSet& det, int class_index, double iou_threshold) {
  PrCurve curve;
  std::vector<const GroundTruthBox*> gts;
  for (const auto& g : det.ground_truths)
    if (g.class_index == class_index) gts.push_back(&g);
  curve.n_gt = static_cast<std::int64_t>(gts.size());

  std::vector<const Detection*> preds;
  for (const auto& p : det.predictions)
    if (p.class_index == class_index) preds.push_back(&p);
  std::stable_sort(preds.begin(), preds.end(),
                   [](const Detection* a, const Detection* b) { return a->confidence > b->confidence; });

  std::vector<bool> matched(gts.size(), false);
  std::int64_t tp = 0;
  curve.precision.reserve(preds.size());
  curve.recall.reserve(preds.size());
  for (std::size_t k = 0; k < preds.size(); ++k) {
    // Greedy match: highest IoU at or above the threshold among unmatched
    // ground truths of the same image; the first one wins exact ties.
    int best = -1;
    double best_iou = 0.0;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (matched[g] || gts[g]->image_id != preds[k]->image_id) continue;
      const double v = iou(preds[k]->box, gts[g]->box);
      if (v >= iou_threshold && (best < 0 || v > best_iou)) {
        best = static_cast<int>(g);
        best_iou = v;
      }
    }
    if (best >= 0) {
      matched[static_cast<std::size_t>(best)] = true;
      ++tp;
    }
    curve.precision.push_back(static_cast<double>(tp) / static_cast<double>(k + 1));
    curve.recall.push_back(safe_div(static_cast<double>(tp), static_cast<double>(curve.n_gt)));
  }
  curve.tp_total = tp;
  return curve;
}

double interpolated_ap(const PrCurve& curve) {
  if (curve.n_gt == 0) return 0.0;
  const std::size_t n = curve.precision.size();
  // Precision envelope: max precision over the suffix starting at k.
  std::vector<double> envelope(n);
  double running = 0.0;
  for (std::size_t k = n; k > 0; --k) {
    running = std::max(running, curve.precision[k - 1]);
    envelope[k - 1] = running;
  }
  double sum = 0.0;
  for (int i = 0; i <= 100; ++i) {
    const double r = i / 100.0;
    // recall is non-decreasing, so the first index reaching r starts the suffix
    const auto it = std::lower_bound(curve.recall.begin(), curve.recall.end(), r);
    if (it != curve.recall.end()) sum += envelope[static_cast<std::size_t>(it - curve.recall.begin())];
  }
  return sum / 101.0;
}

std::set<int> gt_classes(const DetectionSet& det) {
  std::set<int> classes;
  for (const auto& g : det.ground_truths) classes.insert(g.class_index);
  return classes;
}

}  // namespace

ConfusionMatrix confusion(const std::vector<Label>& predictions, const std::vector<Label>& truths) {
  require(predictions.size() == truths.size(), Errc::domain,
          "prediction and truth lists differ in length: " + std::to_string(predictions.size()) + " vs " +
              std::to_string(truths.size()));
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < truths.size(); ++i) {
    if (truths[i] == Label::pass)
      (predictions[i] == Label::pass ? cm.tp_pass : cm.pass_as_fail)++;
    else
      (predictions[i] == Label::fail ? cm.tp_fail : cm.fail_as_pass)++;
  }
  return cm;
}

ClassificationReport report(const ConfusionMatrix& cm) {
  require(cm.total() > 0, Errc::domain, "cannot report on an empty confusion matrix");
  require(cm.tp_pass >= 0 && cm.pass_as_fail >= 0 && cm.fail_as_pass >= 0 && cm.tp_fail >= 0, Errc::domain,
          "confusion matrix counts must be non-negative");
  ClassificationReport r;

  const std::int64_t predicted_pass = cm.tp_pass + cm.fail_as_pass;
  const std::int64_t predicted_fail = cm.tp_fail + cm.pass_as_fail;

  r.pass_cls.support = cm.support_pass();
  r.pass_cls.precision_defined = predicted_pass > 0;
  r.pass_cls.precision = safe_div(static_cast<double>(cm.tp_pass), static_cast<double>(predicted_pass));
  r.pass_cls.recall = safe_div(static_cast<double>(cm.tp_pass), static_cast<double>(cm.support_pass()));
  r.pass_cls.f1 = f1_of(r.pass_cls.precision, r.pass_cls.recall);

  r.fail_cls.support = cm.support_fail();
  r.fail_cls.precision_defined = predicted_fail > 0;
  r.fail_cls.precision = safe_div(static_cast<double>(cm.tp_fail), static_cast<double>(predicted_fail));
  r.fail_cls.recall = safe_div(static_cast<double>(cm.tp_fail), static_cast<double>(cm.support_fail()));
  r.fail_cls.f1 = f1_of(r.fail_cls.precision, r.fail_cls.recall);

  const double total = static_cast<double>(cm.total());
  const double wp = static_cast<double>(r.pass_cls.support) / total;
  const double wf = static_cast<double>(r.fail_cls.support) / total;

  r.macro_precision = (r.pass_cls.precision + r.fail_cls.precision) / 2.0;
  r.macro_recall = (r.pass_cls.recall + r.fail_cls.recall) / 2.0;
  r.macro_f1 = (r.pass_cls.f1 + r.fail_cls.f1) / 2.0;
  r.weighted_precision = wp * r.pass_cls.precision + wf * r.fail_cls.precision;
  r.weighted_recall = wp * r.pass_cls.recall + wf * r.fail_cls.recall;
  r.weighted_f1 = wp * r.pass_cls.f1 + wf * r.fail_cls.f1;
  r.accuracy = static_cast<double>(cm.tp_pass + cm.tp_fail) / total;
  r.balanced_accuracy = (r.pass_cls.recall + r.fail_cls.recall) / 2.0;
  return r;
}

std::string report_text(const ClassificationReport& r) {
  std::ostringstream out;
  auto row = [&](const std::string& name, const std::string& p, const std::string& rec,
                 const std::string& f1, const std::string& support) {
    out << name;
    for (std::size_t i = name.size(); i < 14; ++i) out << ' ';
    for (const std::string& v : {p, rec, f1}) {
      out << v;
      for (std::size_t i = v.size(); i < 11; ++i) out << ' ';
    }
    out << support << "\n";
  };
  const std::string total = std::to_string(r.pass_cls.support + r.fail_cls.support);
  row("Class", "Precision", "Recall", "F1-Score", "# Images");
  row("Pass", fmt3(r.pass_cls.precision), fmt3(r.pass_cls.recall), fmt3(r.pass_cls.f1),
      std::to_string(r.pass_cls.support));
  row("Fail", fmt3(r.fail_cls.precision), fmt3(r.fail_cls.recall), fmt3(r.fail_cls.f1),
      std::to_string(r.fail_cls.support));
  row("Macro Avg", fmt3(r.macro_precision), fmt3(r.macro_recall), fmt3(r.macro_f1), total);
  row("Weighted Avg", fmt3(r.weighted_precision), fmt3(r.weighted_recall), fmt3(r.weighted_f1), total);
  row("Accuracy", "--", "--", fmt3(r.accuracy), total);
  row("Balanced Acc", "--", "--", fmt3(r.balanced_accuracy), total);
  if (!r.pass_cls.precision_defined || !r.fail_cls.precision_defined)
    out << "note: precision reported as 0 for a class that was never predicted\n";
  return out.str();
}

std::string report_json(const ClassificationReport& r, const ConfusionMatrix& cm) {
  nlohmann::ordered_json j;
  j["confusion_matrix"] = {{"tp_pass", cm.tp_pass},
                           {"pass_as_fail", cm.pass_as_fail},
                           {"fail_as_pass", cm.fail_as_pass},
                           {"tp_fail", cm.tp_fail}};
  auto cls = [](const ClassMetrics& m) {
    nlohmann::ordered_json c;
    c["precision"] = m.precision;
    c["recall"] = m.recall;
    c["f1"] = m.f1;
    c["support"] = m.support;
    c["precision_defined"] = m.precision_defined;
    return c;
  };
  j["pass"] = cls(r.pass_cls);
  j["fail"] = cls(r.fail_cls);
  j["macro"] = {{"precision", r.macro_precision}, {"recall", r.macro_recall}, {"f1", r.macro_f1}};
  j["weighted"] = {{"precision", r.weighted_precision}, {"recall", r.weighted_recall}, {"f1", r.weighted_f1}};
  j["accuracy"] = r.accuracy;
  j["balanced_accuracy"] = r.balanced_accuracy;
  return j.dump(2);
}

double iou(const BoxF& a, const BoxF& b) {
  const double ix = std::max(0.0, std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min));
  const double iy = std::max(0.0, std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min));
  const double inter = ix * iy;
  const double uni = a.area() + b.area() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

std::optional<double> average_precision(const DetectionSet& det, int class_index, double iou_threshold) {
  require(iou_threshold > 0.0 && iou_threshold < 1.0, Errc::domain, "IoU threshold out of (0,1)");
  const PrCurve curve = pr_curve(det, class_index, iou_threshold);
  if (curve.n_gt == 0) return std::nullopt;
  return interpolated_ap(curve);
}

DetectionMetrics map_range(const DetectionSet& det) {
  require(!det.ground_truths.empty(), Errc::domain, "detection set has no ground truths");
  for (const auto& p : det.predictions)
    require(p.confidence >= 0.0 && p.confidence <= 1.0, Errc::domain, "confidence out of [0,1]");

  DetectionMetrics m;
  const std::set<int> classes = gt_classes(det);
  std::set<int> predicted;
  for (const auto& p : det.predictions) predicted.insert(p.class_index);
  for (int c : predicted)
    if (!classes.count(c)) m.skipped_classes.push_back(c);

  double sum50 = 0.0;
  double sum_range = 0.0;
  for (int c : classes) sum50 += *average_precision(det, c, 0.50);
  for (int t = 0; t < 10; ++t) {
    const double thr = 0.50 + 0.05 * t;
    double sum_t = 0.0;
    for (int c : classes) sum_t += *average_precision(det, c, thr);
    sum_range += sum_t / static_cast<double>(classes.size());
  }
  m.map50 = sum50 / static_cast<double>(classes.size());
  m.map50_95 = sum_range / 10.0;

  // Operating-point precision/recall: confidence >= 0.25 at IoU 0.5,
  // micro-aggregated over classes.
  std::int64_t tp = 0, n_pred = 0, n_gt = static_cast<std::int64_t>(det.ground_truths.size());
  for (int c : classes) {
    DetectionSet filtered;
    for (const auto& p : det.predictions)
      if (p.class_index == c && p.confidence >= 0.25) filtered.predictions.push_back(p);
    for (const auto& g : det.ground_truths)
      if (g.class_index == c) filtered.ground_truths.push_back(g);
    const PrCurve curve = pr_curve(filtered, c, 0.50);
    n_pred += static_cast<std::int64_t>(curve.precision.size());
    tp += curve.tp_total;
  }
  m.precision_defined = n_pred > 0;
  m.precision = safe_div(static_cast<double>(tp), static_cast<double>(n_pred));
  m.recall = safe_div(static_cast<double>(tp), static_cast<double>(n_gt));
  return m;
}

DetectionSet load_detection_set(const std::vector<std::filesystem::path>& gt_label_files,
                                const std::filesystem::path& prediction_dir, int image_w, int image_h) {
  DetectionSet det;
  int image_id = 0;
  for (const auto& gt_path : gt_label_files) {
    std::ifstream gt(gt_path);
    require(gt.good(), Errc::io, "cannot open ground-truth labels: " + gt_path.string());
    std::string line;
    while (std::getline(gt, line)) {
      if (line.empty()) continue;
      const YoloBox y = parse_yolo_line(line);
      const PixelBox p = to_pixel_box(y, image_w, image_h);
      det.ground_truths.push_back({image_id, {p.x_min, p.y_min, p.x_max, p.y_max}, y.class_index});
    }
    const std::filesystem::path pred_path = prediction_dir / gt_path.filename();
    if (std::filesystem::exists(pred_path)) {
      std::ifstream pred(pred_path);
      require(pred.good(), Errc::io, "cannot open predictions: " + pred_path.string());
      while (std::getline(pred, line)) {
        if (line.empty()) continue;
        const YoloBox y = parse_yolo_line(line);
        require(y.confidence.has_value(), Errc::io,
                "prediction line missing confidence in " + pred_path.string());
        const PixelBox p = to_pixel_box(y, image_w, image_h);
        det.predictions.push_back({image_id, {p.x_min, p.y_min, p.x_max, p.y_max}, y.class_index, *y.confidence});
      }
    }
    ++image_id;
  }
  return det;
}

}  // namespace sdg
