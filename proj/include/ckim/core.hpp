#pragma once

// Shared domain types: normalized boxes, detection records, the (BoxS, CtoB)
// feature pair and the ordered size-label space used to compose fine labels.

#include <Eigen/Core>

#include <compare>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ckim {

/// Thrown for malformed inputs anywhere in the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Center-format box in normalized image coordinates. The y axis points down,
/// so y_center = 0 is the top edge and y_center = 1 the bottom edge.
struct BoundingBox {
  double x_center = 0.0;
  double y_center = 0.0;
  double width = 0.0;
  double height = 0.0;

  /// Validates and constructs; throws ckim::Error on a violated invariant.
  static BoundingBox make(double x_center, double y_center, double width, double height);

  [[nodiscard]] double area() const noexcept { return width * height; }
  [[nodiscard]] double left() const noexcept { return x_center - 0.5 * width; }
  [[nodiscard]] double right() const noexcept { return x_center + 0.5 * width; }
  [[nodiscard]] double top() const noexcept { return y_center - 0.5 * height; }
  [[nodiscard]] double bottom() const noexcept { return y_center + 0.5 * height; }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

[[nodiscard]] bool is_valid(const BoundingBox& box) noexcept;

/// Pixel rectangle as emitted by a detector, center format.
struct PixelBox {
  double x_center = 0.0;
  double y_center = 0.0;
  double width = 0.0;
  double height = 0.0;
};

/// Ordinal size index; 0 is the smallest class.
struct SizeClass {
  std::size_t index = 0;

  friend auto operator<=>(const SizeClass&, const SizeClass&) = default;
};

/// Ordered size names (smallest first) plus the separator used in fine labels.
class LabelSpace {
 public:
  explicit LabelSpace(std::vector<std::string> names, std::string separator = " ");

  /// "small","large" for K=2; "small","middle","large" for K=3.
  static LabelSpace standard(std::size_t num_classes, std::string separator = " ");

  [[nodiscard]] std::size_t size() const noexcept { return names_.size(); }
  [[nodiscard]] const std::vector<std::string>& names() const noexcept { return names_; }
  [[nodiscard]] const std::string& separator() const noexcept { return separator_; }
  [[nodiscard]] const std::string& name(SizeClass size) const;
  [[nodiscard]] std::optional<SizeClass> find(const std::string& name) const;
  [[nodiscard]] SizeClass parse(const std::string& name) const;

  friend bool operator==(const LabelSpace&, const LabelSpace&) = default;

 private:
  std::vector<std::string> names_;
  std::string separator_;
};

struct DetectionRecord {
  std::string coarse_label;
  BoundingBox box;
  std::optional<SizeClass> truth_size;
  std::optional<double> truth_distance;

  friend bool operator==(const DetectionRecord&, const DetectionRecord&) = default;
};

void validate(const DetectionRecord& record);

/// The two inputs of both inference modules: normalized box area and the
/// center-to-bottom distance 1 - Y, which stands in for distance to camera.
struct FeatureVector {
  double box_s = 0.0;
  double dtoc_proxy = 0.0;

  [[nodiscard]] Eigen::Vector2d vec() const noexcept { return {box_s, dtoc_proxy}; }

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

/// A feature pair with its size class, the training unit of both modules.
struct LabeledFeature {
  FeatureVector x;
  SizeClass size;
};

/// Divides each field by the matching image dimension.
///
/// The box must have positive size no larger than the image, its center must
/// lie in the image, and its top-left corner may not be negative.
[[nodiscard]] BoundingBox normalize_box(const PixelBox& px_box, double image_w, double image_h);

[[nodiscard]] FeatureVector extract_features(const BoundingBox& box) noexcept;

/// "<size-name><separator><coarse>".
[[nodiscard]] std::string compose_fine_label(const std::string& coarse, SizeClass size,
                                             const LabelSpace& space);

/// Inverse of compose_fine_label. Throws ckim::Error when no size name prefixes
/// the label.
[[nodiscard]] std::pair<std::string, SizeClass> decompose_fine_label(const std::string& fine,
                                                                     const LabelSpace& space);

}  // namespace ckim
