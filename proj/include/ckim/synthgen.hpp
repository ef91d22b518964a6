#pragma once

// Synthetic pinhole-camera scenes with known object sizes and distances, and
// an auditor that measures how often the two size heuristics hold on a
// labelled dataset.
//
// Camera model. The image plane sits at focal_length in front of the pinhole
// and is 1 world unit tall and image_aspect units wide. The optical axis is
// horizontal and the horizon crosses the image at row fraction horizon_y
// (a lens shift, which keeps the projection linear). An object with radius r
// whose center sits camera_height below the camera, at depth z and lateral
// offset x, projects to the normalized box
//
//   width    = 2 f r / (z * aspect)        height   = 2 f r / z
//   x_center = 0.5 + f x / (z * aspect)    y_center = horizon_y + f h / z
//
// so apparent size falls as 1/z and the box center moves up toward the
// horizon as z grows, i.e. 1 - y_center is strictly increasing in depth.
//
// With top_down set the camera looks straight down at the objects instead.
// Depth then varies only with object height, and the box center is
//
//   x_center = 0.5 + f x / (z * aspect)    y_center = 0.5 + f v / z
//
// for a second lateral offset v drawn independently, so image row carries no
// information about distance.

#include "ckim/core.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ckim {

struct SceneSpec {
  double camera_height = 1.5;
  double focal_length = 1.0;
  double image_aspect = 4.0 / 3.0;
  double horizon_y = 0.3;
  /// True radius per size class, strictly increasing.
  std::vector<double> class_radii{0.175, 0.35, 0.7};
  /// Per-object radius jitter as a fraction of the class radius, uniform in
  /// [-size_jitter, size_jitter]. Nonzero values make classes overlap.
  double size_jitter = 0.0;
  /// Detector localization error: projected width and height are each scaled
  /// by 1 + box_noise * n, n a standard normal truncated to [-3, 3]. Box
  /// centers are exact.
  double box_noise = 0.0;
  double depth_min = 4.0;
  double depth_max = 8.0;
  /// Lateral offsets are drawn from [-lateral_range, lateral_range].
  double lateral_range = 2.0;
  int objects_per_image = 4;
  bool top_down = false;
  std::uint64_t rng_seed = 0;
  /// Placement attempts per object. An image whose layout fails is re-laid
  /// out (same classes) up to 100 times before generation gives up.
  int rejection_budget = 1000;

  /// Radii a factor 2 apart (plus a middle class for K=3),
  /// no jitter or detector noise.
  static SceneSpec well_separated(std::size_t num_classes = 3);
  /// Close radii with 10% size jitter and 10% detector box noise, so the
  /// class-conditional features overlap.
  static SceneSpec ambiguous(std::size_t num_classes = 3);
};

void validate(const SceneSpec& spec);

/// Throws ckim::Error when the projected box leaves the image.
[[nodiscard]] BoundingBox project_object(const SceneSpec& spec, double true_radius, double depth,
                                         double lateral, double vertical_offset = 0.0);

struct ImageDetections {
  std::string image_id;
  std::vector<DetectionRecord> records;
};

struct SyntheticDataset {
  SceneSpec spec;
  int num_images = 0;
  std::vector<ImageDetections> images;
};

[[nodiscard]] SyntheticDataset generate(const SceneSpec& spec, int num_images);

/// Flattens every record that carries a truth size into training samples.
[[nodiscard]] std::vector<LabeledFeature> labeled_features(std::span<const ImageDetections> images);

struct ImageAudit {
  std::string image_id;
  std::size_t knowledge1_pairs = 0;
  std::size_t knowledge1_valid = 0;
  std::size_t knowledge2_pairs = 0;
  std::size_t knowledge2_valid = 0;
};

struct AuditReport {
  /// Empty when no qualifying pair exists.
  std::optional<double> knowledge1_validity;
  std::optional<double> knowledge2_validity;
  std::size_t knowledge1_pairs = 0;
  std::size_t knowledge1_valid = 0;
  std::size_t knowledge2_pairs = 0;
  std::size_t knowledge2_valid = 0;
  double depth_tolerance = 0.0;
  std::vector<ImageAudit> per_image;
};

/// Pairwise audit over objects of the same image.
///
/// Apparent size (knowledge 1): among pairs with different true sizes whose
/// true distances differ by at most depth_tolerance, the fraction where the
/// larger object also has the larger box area.
///
/// Distance from image bottom (knowledge 2): among pairs with different true
/// distances, the fraction where the farther object also has the larger
/// 1 - y_center.
///
/// Without an explicit tolerance, 1% of the observed distance range is used.
[[nodiscard]] AuditReport audit_knowledge(std::span<const ImageDetections> images,
                                          std::optional<double> depth_tolerance = std::nullopt);

}  // namespace ckim
