#include "ckim/synthgen.hpp"

#include "ckim/random.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>

namespace ckim {
namespace {

constexpr std::array kColors{"gray", "red", "blue", "green", "brown", "purple", "cyan", "yellow"};
constexpr std::array kMaterials{"rubber", "metal"};
constexpr std::array kShapes{"cube", "sphere", "cylinder"};

bool inside_unit_square(const BoundingBox& b) {
  return b.left() >= 0.0 && b.right() <= 1.0 && b.top() >= 0.0 && b.bottom() <= 1.0;
}

bool contains(const BoundingBox& b, double x, double y) {
  return x >= b.left() && x <= b.right() && y >= b.top() && y <= b.bottom();
}

bool overlaps(const BoundingBox& a, const BoundingBox& b) {
  return contains(a, b.x_center, b.y_center) || contains(b, a.x_center, a.y_center);
}

std::string image_name(std::uint64_t seed, int index) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "s%llu_%06d", static_cast<unsigned long long>(seed), index);
  return buf;
}

// Standard normal truncated to [-3, 3] so multiplicative noise stays positive.
double truncated_normal(Rng& rng) {
  double v = rng.normal();
  while (std::abs(v) > 3.0) v = rng.normal();
  return v;
}

constexpr int kLayoutRestarts = 100;

}  // namespace

SceneSpec SceneSpec::well_separated(std::size_t num_classes) {
  SceneSpec s;
  if (num_classes == 2) {
    s.class_radii = {0.35, 0.7};
  } else if (num_classes == 3) {
    s.class_radii = {0.175, 0.35, 0.7};
  } else {
    throw Error("preset scenes exist for 2 or 3 classes");
  }
  return s;
}

SceneSpec SceneSpec::ambiguous(std::size_t num_classes) {
  SceneSpec s;
  if (num_classes == 2) {
    s.class_radii = {0.35, 0.5};
  } else if (num_classes == 3) {
    s.class_radii = {0.35, 0.5, 0.7};
  } else {
    throw Error("preset scenes exist for 2 or 3 classes");
  }
  s.size_jitter = 0.1;
  s.box_noise = 0.1;
  return s;
}

void validate(const SceneSpec& s) {
  if (!(s.camera_height > 0.0) || !(s.focal_length > 0.0) || !(s.image_aspect > 0.0)) {
    throw Error("camera height, focal length and aspect must be positive");
  }
  if (!(s.horizon_y >= 0.0 && s.horizon_y <= 1.0)) throw Error("horizon_y must lie in [0,1]");
  if (s.class_radii.size() < 2) throw Error("scene needs at least two size classes");
  for (std::size_t i = 0; i < s.class_radii.size(); ++i) {
    if (!(s.class_radii[i] > 0.0)) throw Error("class radii must be positive");
    if (i > 0 && !(s.class_radii[i] > s.class_radii[i - 1])) {
      throw Error("class radii must be strictly increasing");
    }
  }
  if (!(s.size_jitter >= 0.0 && s.size_jitter < 1.0)) throw Error("size_jitter must lie in [0,1)");
  if (!(s.box_noise >= 0.0 && s.box_noise < 1.0 / 3.0)) throw Error("box_noise must lie in [0,1/3)");
  if (!(s.depth_min > 0.0 && s.depth_min < s.depth_max)) throw Error("need 0 < depth_min < depth_max");
  if (!(s.depth_min > s.focal_length)) throw Error("objects must lie beyond the image plane");
  if (!(s.lateral_range >= 0.0)) throw Error("lateral_range must be non-negative");
  if (s.objects_per_image <= 0) throw Error("objects_per_image must be positive");
  if (s.rejection_budget <= 0) throw Error("rejection_budget must be positive");
}

BoundingBox project_object(const SceneSpec& s, double true_radius, double depth, double lateral,
                           double vertical_offset) {
  const double f_over_z = s.focal_length / depth;
  BoundingBox b;
  b.width = 2.0 * f_over_z * true_radius / s.image_aspect;
  b.height = 2.0 * f_over_z * true_radius;
  b.x_center = 0.5 + f_over_z * lateral / s.image_aspect;
  b.y_center = s.top_down ? 0.5 + f_over_z * vertical_offset : s.horizon_y + f_over_z * s.camera_height;
  if (!is_valid(b) || !inside_unit_square(b)) throw Error("object projects outside the image");
  return b;
}

SyntheticDataset generate(const SceneSpec& spec, int num_images) {
  validate(spec);
  if (num_images <= 0) throw Error("num_images must be positive");

  SyntheticDataset ds{spec, num_images, {}};
  ds.images.reserve(static_cast<std::size_t>(num_images));
  Rng rng(spec.rng_seed);
  const auto k = spec.class_radii.size();

  struct Slot {
    SizeClass size;
    double radius = 0.0;
    std::string coarse;
  };
  std::vector<Slot> slots(static_cast<std::size_t>(spec.objects_per_image));

  for (int img = 0; img < num_images; ++img) {
    for (auto& slot : slots) {
      slot.size = SizeClass{rng.below(k)};
      slot.radius = spec.class_radii[slot.size.index] * (1.0 + spec.size_jitter * rng.uniform(-1.0, 1.0));
      slot.coarse = kColors[rng.below(kColors.size())];
      slot.coarse += ' ';
      slot.coarse += kMaterials[rng.below(kMaterials.size())];
      slot.coarse += ' ';
      slot.coarse += kShapes[rng.below(kShapes.size())];
    }

    // Classes stay fixed across layout restarts so rejection cannot skew the
    // class balance toward objects that are easy to place.
    ImageDetections image{image_name(spec.rng_seed, img), {}};
    for (int layout = 0; layout < kLayoutRestarts && image.records.size() < slots.size(); ++layout) {
      image.records.clear();
      for (const auto& slot : slots) {
        bool placed = false;
        for (int attempt = 0; attempt < spec.rejection_budget && !placed; ++attempt) {
          const double depth = rng.uniform(spec.depth_min, spec.depth_max);
          const double lateral = rng.uniform(-spec.lateral_range, spec.lateral_range);
          const double vertical =
              spec.top_down ? rng.uniform(-spec.lateral_range, spec.lateral_range) : 0.0;
          const double noise_w = spec.box_noise > 0.0 ? spec.box_noise * truncated_normal(rng) : 0.0;
          const double noise_h = spec.box_noise > 0.0 ? spec.box_noise * truncated_normal(rng) : 0.0;
          BoundingBox box;
          try {
            box = project_object(spec, slot.radius, depth, lateral, vertical);
          } catch (const Error&) {
            continue;
          }
          box.width *= 1.0 + noise_w;
          box.height *= 1.0 + noise_h;
          if (!is_valid(box) || !inside_unit_square(box)) continue;
          const bool clash = std::any_of(image.records.begin(), image.records.end(),
                                         [&](const DetectionRecord& r) { return overlaps(r.box, box); });
          if (clash) continue;
          image.records.push_back({slot.coarse, box, slot.size, depth});
          placed = true;
        }
        if (!placed) break;
      }
    }
    if (image.records.size() < slots.size()) {
      throw Error("rejection budget exhausted placing the objects of image " + std::to_string(img) +
                  "; the scene is too crowded");
    }
    ds.images.push_back(std::move(image));
  }
  return ds;
}

std::vector<LabeledFeature> labeled_features(std::span<const ImageDetections> images) {
  std::vector<LabeledFeature> out;
  for (const auto& img : images) {
    for (const auto& r : img.records) {
      if (r.truth_size) out.push_back({extract_features(r.box), *r.truth_size});
    }
  }
  return out;
}

AuditReport audit_knowledge(std::span<const ImageDetections> images,
                            std::optional<double> depth_tolerance) {
  double dmin = INFINITY;
  double dmax = -INFINITY;
  for (const auto& img : images) {
    for (const auto& r : img.records) {
      if (!r.truth_size || !r.truth_distance) {
        throw Error("audit needs truth_size and truth_distance on every record (image " +
                    img.image_id + ")");
      }
      dmin = std::min(dmin, *r.truth_distance);
      dmax = std::max(dmax, *r.truth_distance);
    }
  }

  AuditReport rep;
  rep.depth_tolerance = depth_tolerance ? *depth_tolerance : (dmax > dmin ? 0.01 * (dmax - dmin) : 0.0);

  for (const auto& img : images) {
    ImageAudit ia{img.image_id};
    const auto& rs = img.records;
    for (std::size_t a = 0; a < rs.size(); ++a) {
      const auto fa = extract_features(rs[a].box);
      for (std::size_t b = a + 1; b < rs.size(); ++b) {
        const auto fb = extract_features(rs[b].box);
        const double da = *rs[a].truth_distance;
        const double db = *rs[b].truth_distance;

        if (da != db) {
          ++ia.knowledge2_pairs;
          if ((da > db) == (fa.dtoc_proxy > fb.dtoc_proxy) && fa.dtoc_proxy != fb.dtoc_proxy) {
            ++ia.knowledge2_valid;
          }
        }
        const auto sa = *rs[a].truth_size;
        const auto sb = *rs[b].truth_size;
        if (sa != sb && std::abs(da - db) <= rep.depth_tolerance) {
          ++ia.knowledge1_pairs;
          if ((sa > sb) == (fa.box_s > fb.box_s) && fa.box_s != fb.box_s) ++ia.knowledge1_valid;
        }
      }
    }
    rep.knowledge1_pairs += ia.knowledge1_pairs;
    rep.knowledge1_valid += ia.knowledge1_valid;
    rep.knowledge2_pairs += ia.knowledge2_pairs;
    rep.knowledge2_valid += ia.knowledge2_valid;
    rep.per_image.push_back(std::move(ia));
  }
  if (rep.knowledge1_pairs > 0) {
    rep.knowledge1_validity = static_cast<double>(rep.knowledge1_valid) / rep.knowledge1_pairs;
  }
  if (rep.knowledge2_pairs > 0) {
    rep.knowledge2_validity = static_cast<double>(rep.knowledge2_valid) / rep.knowledge2_pairs;
  }
  return rep;
}

}  // namespace ckim
