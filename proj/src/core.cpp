#include "ckim/core.hpp"

#include <cmath>
#include <set>

namespace ckim {

bool is_valid(const BoundingBox& box) noexcept {
  const auto in_unit = [](double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; };
  return in_unit(box.x_center) && in_unit(box.y_center) && in_unit(box.width) &&
         in_unit(box.height) && box.width > 0.0 && box.height > 0.0;
}

BoundingBox BoundingBox::make(double x_center, double y_center, double width, double height) {
  BoundingBox box{x_center, y_center, width, height};
  if (!is_valid(box)) {
    throw Error("invalid bounding box: centers must lie in [0,1] and sizes in (0,1]");
  }
  return box;
}

LabelSpace::LabelSpace(std::vector<std::string> names, std::string separator)
    : names_(std::move(names)), separator_(std::move(separator)) {
  if (names_.size() < 2) throw Error("label space needs at least two size classes");
  if (separator_.empty()) throw Error("label separator must be non-empty");
  std::set<std::string> seen;
  for (const auto& n : names_) {
    if (n.empty()) throw Error("size class names must be non-empty");
    if (n.find(separator_) != std::string::npos) {
      throw Error("size class name '" + n + "' contains the label separator");
    }
    if (!seen.insert(n).second) throw Error("duplicate size class name '" + n + "'");
  }
}

LabelSpace LabelSpace::standard(std::size_t num_classes, std::string separator) {
  switch (num_classes) {
    case 2:
      return LabelSpace({"small", "large"}, std::move(separator));
    case 3:
      return LabelSpace({"small", "middle", "large"}, std::move(separator));
    default:
      throw Error("no canonical size names for K=" + std::to_string(num_classes));
  }
}

const std::string& LabelSpace::name(SizeClass size) const {
  if (size.index >= names_.size()) {
    throw Error("size index " + std::to_string(size.index) + " out of range for K=" +
                std::to_string(names_.size()));
  }
  return names_[size.index];
}

std::optional<SizeClass> LabelSpace::find(const std::string& name) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return SizeClass{i};
  }
  return std::nullopt;
}

SizeClass LabelSpace::parse(const std::string& name) const {
  if (auto s = find(name)) return *s;
  throw Error("unknown size class '" + name + "'");
}

void validate(const DetectionRecord& record) {
  if (record.coarse_label.empty()) throw Error("detection has an empty coarse label");
  if (!is_valid(record.box)) throw Error("detection has an invalid bounding box");
  if (record.truth_distance &&
      (!std::isfinite(*record.truth_distance) || *record.truth_distance < 0.0)) {
    throw Error("truth_distance must be finite and non-negative");
  }
}

BoundingBox normalize_box(const PixelBox& px, double image_w, double image_h) {
  if (!(image_w > 0.0) || !(image_h > 0.0) || !std::isfinite(image_w) || !std::isfinite(image_h)) {
    throw Error("image dimensions must be positive");
  }
  if (!(px.width > 0.0) || !(px.height > 0.0)) throw Error("box has zero or negative size");
  if (px.width > image_w || px.height > image_h) throw Error("box is larger than the image");
  if (px.x_center < 0.0 || px.y_center < 0.0 || px.x_center > image_w || px.y_center > image_h) {
    throw Error("box center lies outside the image");
  }
  if (px.x_center - 0.5 * px.width < 0.0 || px.y_center - 0.5 * px.height < 0.0) {
    throw Error("box extends outside the image");
  }
  return BoundingBox::make(px.x_center / image_w, px.y_center / image_h, px.width / image_w,
                           px.height / image_h);
}

FeatureVector extract_features(const BoundingBox& box) noexcept {
  return {box.width * box.height, 1.0 - box.y_center};
}

std::string compose_fine_label(const std::string& coarse, SizeClass size, const LabelSpace& space) {
  return space.name(size) + space.separator() + coarse;
}

std::pair<std::string, SizeClass> decompose_fine_label(const std::string& fine,
                                                       const LabelSpace& space) {
  const auto& sep = space.separator();
  for (std::size_t i = 0; i < space.size(); ++i) {
    const auto& n = space.names()[i];
    if (fine.size() > n.size() + sep.size() && fine.compare(0, n.size(), n) == 0 &&
        fine.compare(n.size(), sep.size(), sep) == 0) {
      return {fine.substr(n.size() + sep.size()), SizeClass{i}};
    }
  }
  throw Error("'" + fine + "' is not a fine label of this label space");
}

}  // namespace ckim
