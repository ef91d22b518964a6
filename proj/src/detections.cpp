#include "ckim/detections.hpp"

#include "json.hpp"

#include <fstream>
#include <map>
#include <sstream>

namespace ckim {
namespace {

using nlohmann::json;

double number(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) throw Error(std::string("missing field '") + key + "'");
  if (!it->is_number()) throw Error(std::string("field '") + key + "' must be a number");
  return it->get<double>();
}

std::optional<double> optional_number(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_number()) throw Error(std::string("field '") + key + "' must be a number");
  return it->get<double>();
}

std::string text(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) throw Error(std::string("missing field '") + key + "'");
  if (!it->is_string()) throw Error(std::string("field '") + key + "' must be a string");
  return it->get<std::string>();
}

PixelBox read_box(const json& b) {
  if (!b.is_object()) throw Error("field 'box' must be an object");
  if (b.contains("x_min")) {
    const double x0 = number(b, "x_min");
    const double y0 = number(b, "y_min");
    const double x1 = number(b, "x_max");
    const double y1 = number(b, "y_max");
    return {0.5 * (x0 + x1), 0.5 * (y0 + y1), x1 - x0, y1 - y0};
  }
  return {number(b, "x_center"), number(b, "y_center"), number(b, "width"), number(b, "height")};
}

struct ParsedLine {
  std::string image_id;
  std::optional<double> image_w;
  std::optional<double> image_h;
  Detection detection;
};

ParsedLine parse_line(const std::string& line, const LabelSpace& space) {
  const json j = json::parse(line);
  if (!j.is_object()) throw Error("record is not a JSON object");

  ParsedLine p;
  p.image_id = text(j, "image_id");
  p.image_w = optional_number(j, "image_w");
  p.image_h = optional_number(j, "image_h");

  auto& rec = p.detection.record;
  rec.coarse_label = text(j, "coarse_label");
  if (!j.contains("box")) throw Error("missing field 'box'");
  const PixelBox raw = read_box(j.at("box"));

  const std::string coords = j.contains("coords") ? text(j, "coords") : "normalized";
  if (coords == "pixels") {
    if (!p.image_w || !p.image_h) throw Error("coords=\"pixels\" requires image_w and image_h");
    rec.box = normalize_box(raw, *p.image_w, *p.image_h);
  } else if (coords == "normalized") {
    rec.box = normalize_box(raw, 1.0, 1.0);
  } else {
    throw Error("unknown coords '" + coords + "'");
  }

  if (const auto it = j.find("truth_size"); it != j.end() && !it->is_null()) {
    if (it->is_string()) {
      rec.truth_size = space.parse(it->get<std::string>());
    } else if (it->is_number_unsigned()) {
      const auto idx = it->get<std::size_t>();
      if (idx >= space.size()) throw Error("truth_size index out of range");
      rec.truth_size = SizeClass{idx};
    } else {
      throw Error("field 'truth_size' must be a size name or index");
    }
  }
  rec.truth_distance = optional_number(j, "truth_distance");
  if (const auto c = optional_number(j, "confidence")) {
    if (!(*c >= 0.0 && *c <= 1.0)) throw Error("confidence must lie in [0,1]");
    p.detection.confidence = *c;
  }
  if (const auto it = j.find("fine_label"); it != j.end() && !it->is_null()) {
    p.detection.fine_label = text(j, "fine_label");
  }
  validate(rec);
  return p;
}

json spec_to_json(const SceneSpec& s) {
  return json{{"camera_height", s.camera_height},
              {"focal_length", s.focal_length},
              {"image_aspect", s.image_aspect},
              {"horizon_y", s.horizon_y},
              {"class_radii", s.class_radii},
              {"size_jitter", s.size_jitter},
              {"box_noise", s.box_noise},
              {"depth_min", s.depth_min},
              {"depth_max", s.depth_max},
              {"lateral_range", s.lateral_range},
              {"objects_per_image", s.objects_per_image},
              {"top_down", s.top_down},
              {"rng_seed", s.rng_seed},
              {"rejection_budget", s.rejection_budget}};
}

}  // namespace

std::size_t DetectionSet::num_detections() const {
  std::size_t n = 0;
  for (const auto& img : images) n += img.detections.size();
  return n;
}

DetectionSet parse_detections(std::istream& in, const LabelSpace& space, MalformedLines policy) {
  DetectionSet set;
  std::map<std::string, std::size_t> index;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ParsedLine p;
    try {
      p = parse_line(line, space);
    } catch (const std::exception& e) {
      const std::string msg = "line " + std::to_string(line_no) + ": " + e.what();
      if (policy == MalformedLines::fail_fast) throw Error(msg);
      set.warnings.push_back(msg);
      continue;
    }
    auto [it, fresh] = index.try_emplace(p.image_id, set.images.size());
    if (fresh) set.images.push_back({p.image_id, p.image_w, p.image_h, {}});
    set.images[it->second].detections.push_back(std::move(p.detection));
  }
  return set;
}

DetectionSet load_detections(const std::filesystem::path& path, const LabelSpace& space,
                             MalformedLines policy) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read detection file " + path.string());
  return parse_detections(in, space, policy);
}

void write_detections(std::ostream& out, std::span<const DetectionImage> images,
                      const LabelSpace& space) {
  for (const auto& img : images) {
    for (const auto& d : img.detections) {
      const auto& r = d.record;
      json j{{"image_id", img.image_id},
             {"coarse_label", r.coarse_label},
             {"coords", "normalized"},
             {"box",
              {{"x_center", r.box.x_center},
               {"y_center", r.box.y_center},
               {"width", r.box.width},
               {"height", r.box.height}}},
             {"confidence", d.confidence}};
      if (img.image_w) j["image_w"] = *img.image_w;
      if (img.image_h) j["image_h"] = *img.image_h;
      if (r.truth_size) j["truth_size"] = space.name(*r.truth_size);
      if (r.truth_distance) j["truth_distance"] = *r.truth_distance;
      if (d.fine_label) j["fine_label"] = *d.fine_label;
      out << j.dump() << '\n';
    }
  }
}

void save_detections(const std::filesystem::path& path, std::span<const DetectionImage> images,
                     const LabelSpace& space) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  write_detections(out, images, space);
  if (!out) throw Error("write failed for " + path.string());
}

std::vector<DetectionImage> to_detection_images(std::span<const ImageDetections> images) {
  std::vector<DetectionImage> out;
  out.reserve(images.size());
  for (const auto& img : images) {
    DetectionImage di{img.image_id, std::nullopt, std::nullopt, {}};
    for (const auto& r : img.records) di.detections.push_back({r, 1.0, std::nullopt});
    out.push_back(std::move(di));
  }
  return out;
}

std::vector<ImageDetections> to_image_detections(std::span<const DetectionImage> images) {
  std::vector<ImageDetections> out;
  out.reserve(images.size());
  for (const auto& img : images) {
    ImageDetections id{img.image_id, {}};
    for (const auto& d : img.detections) id.records.push_back(d.record);
    out.push_back(std::move(id));
  }
  return out;
}

std::string manifest_json(const SceneSpec& spec, int num_images) {
  return json{{"format_version", 1}, {"num_images", num_images}, {"spec", spec_to_json(spec)}}.dump(2) +
         "\n";
}

std::pair<SceneSpec, int> parse_manifest(const std::string& text) {
  try {
    const json j = json::parse(text);
    if (j.at("format_version").get<int>() != 1) throw Error("unsupported manifest version");
    const json& s = j.at("spec");
    SceneSpec spec;
    spec.camera_height = s.at("camera_height").get<double>();
    spec.focal_length = s.at("focal_length").get<double>();
    spec.image_aspect = s.at("image_aspect").get<double>();
    spec.horizon_y = s.at("horizon_y").get<double>();
    spec.class_radii = s.at("class_radii").get<std::vector<double>>();
    spec.size_jitter = s.at("size_jitter").get<double>();
    spec.box_noise = s.at("box_noise").get<double>();
    spec.depth_min = s.at("depth_min").get<double>();
    spec.depth_max = s.at("depth_max").get<double>();
    spec.lateral_range = s.at("lateral_range").get<double>();
    spec.objects_per_image = s.at("objects_per_image").get<int>();
    spec.top_down = s.at("top_down").get<bool>();
    spec.rng_seed = s.at("rng_seed").get<std::uint64_t>();
    spec.rejection_budget = s.at("rejection_budget").get<int>();
    validate(spec);
    return {spec, j.at("num_images").get<int>()};
  } catch (const json::exception& e) {
    throw Error(std::string("malformed manifest: ") + e.what());
  }
}

void save_dataset(const std::filesystem::path& path, const SyntheticDataset& dataset) {
  const auto space = LabelSpace::standard(dataset.spec.class_radii.size());
  save_detections(path, to_detection_images(dataset.images), space);
  std::ofstream m(path.string() + ".manifest.json");
  if (!m) throw Error("cannot write manifest for " + path.string());
  m << manifest_json(dataset.spec, dataset.num_images);
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace ckim
