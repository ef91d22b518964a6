#pragma once

// JSON-lines detection files and synthetic dataset manifests.
//
// One detection per line:
//
//   {"image_id": "img0", "coarse_label": "red metal cube",
//    "box": {"x_center": .., "y_center": .., "width": .., "height": ..},
//    "coords": "normalized" | "pixels", "image_w": 640, "image_h": 480,
//    "truth_size": "large", "truth_distance": 5.2, "confidence": 0.9,
//    "fine_label": "large red metal cube"}
//
// Only image_id, coarse_label and box are required. "coords" defaults to
// "normalized"; "pixels" requires image_w and image_h. The box may also be
// given in corner form {x_min, y_min, x_max, y_max}, in the same units.
// Unknown fields are ignored. Files are always written with normalized
// center-format boxes.

#include "ckim/core.hpp"
#include "ckim/synthgen.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ckim {

struct Detection {
  DetectionRecord record;
  double confidence = 1.0;
  std::optional<std::string> fine_label;

  friend bool operator==(const Detection&, const Detection&) = default;
};

struct DetectionImage {
  std::string image_id;
  std::optional<double> image_w;
  std::optional<double> image_h;
  std::vector<Detection> detections;

  friend bool operator==(const DetectionImage&, const DetectionImage&) = default;
};

enum class MalformedLines { fail_fast, skip_and_warn };

struct DetectionSet {
  /// Grouped by image_id, in order of first appearance.
  std::vector<DetectionImage> images;
  /// "line N: reason" for every skipped line.
  std::vector<std::string> warnings;

  [[nodiscard]] std::size_t num_detections() const;
};

/// truth_size names are resolved against `space`.
[[nodiscard]] DetectionSet parse_detections(std::istream& in, const LabelSpace& space,
                                            MalformedLines policy = MalformedLines::fail_fast);

[[nodiscard]] DetectionSet load_detections(const std::filesystem::path& path, const LabelSpace& space,
                                           MalformedLines policy = MalformedLines::fail_fast);

void write_detections(std::ostream& out, std::span<const DetectionImage> images,
                      const LabelSpace& space);

void save_detections(const std::filesystem::path& path, std::span<const DetectionImage> images,
                     const LabelSpace& space);

[[nodiscard]] std::vector<DetectionImage> to_detection_images(std::span<const ImageDetections> images);
[[nodiscard]] std::vector<ImageDetections> to_image_detections(std::span<const DetectionImage> images);

/// Scene parameters plus image count; enough to regenerate a dataset.
[[nodiscard]] std::string manifest_json(const SceneSpec& spec, int num_images);
[[nodiscard]] std::pair<SceneSpec, int> parse_manifest(const std::string& text);

/// Writes `path` (JSONL) and `path` + ".manifest.json".
void save_dataset(const std::filesystem::path& path, const SyntheticDataset& dataset);

[[nodiscard]] std::string read_text_file(const std::filesystem::path& path);

}  // namespace ckim
