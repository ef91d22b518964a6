#pragma once

// Evaluation of fine-labelled predictions against ground truth: size
// accuracy over matched boxes, mAP at an IoU threshold, and CKIM latency.

#include "ckim/detections.hpp"
#include "ckim/model_io.hpp"

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ckim {

[[nodiscard]] double iou(const BoundingBox& a, const BoundingBox& b) noexcept;

enum class ApInterpolation { all_points, eleven_point };

struct EvalConfig {
  double iou_threshold = 0.5;
  ApInterpolation interpolation = ApInterpolation::all_points;
};

struct EvalReport {
  /// Correct sizes over matched prediction/truth pairs.
  double size_accuracy = 0.0;
  /// Matched pairs with the right fine label over all truth boxes.
  double fine_label_accuracy = 0.0;
  /// Rows are truth sizes, columns predicted sizes, over matched pairs.
  std::vector<std::vector<std::size_t>> confusion;
  std::optional<double> map50;
  std::map<std::string, double> ap_per_class;
  std::size_t truth_count = 0;
  std::size_t prediction_count = 0;
  std::size_t matched = 0;
  std::optional<double> mean_latency_us;
  std::optional<std::size_t> model_bytes;
};

/// A prediction in a ranked list: its score and whether it matched a truth.
struct RankedHit {
  double confidence = 0.0;
  bool true_positive = false;
};

/// Area under the precision/recall curve of hits ranked by descending
/// confidence (stable for ties).
[[nodiscard]] double average_precision(std::vector<RankedHit> hits, std::size_t num_truth,
                                       ApInterpolation interpolation = ApInterpolation::all_points);

/// Predictions need fine labels; truths need truth sizes. Matching is greedy
/// by descending confidence: each prediction takes the unmatched truth in the
/// same image with the highest IoU above the threshold (same coarse label for
/// size accuracy, same fine label for AP).
[[nodiscard]] EvalReport evaluate(std::span<const DetectionImage> predictions,
                                  std::span<const DetectionImage> ground_truth,
                                  const LabelSpace& space, const EvalConfig& cfg = {});

/// Mean wall-clock microseconds per CKIM inference (feature extraction plus
/// classification), cycling through `boxes` for `repetitions` calls.
[[nodiscard]] double measure_latency_us(const Model& model, std::span<const BoundingBox> boxes,
                                        std::size_t repetitions = 10000);

}  // namespace ckim
