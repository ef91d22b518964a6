#include "ckim/model_io.hpp"

#include "ckim/detections.hpp"

#include "json.hpp"

#include <cstdio>
#include <fstream>

namespace ckim {
namespace {

using nlohmann::json;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

json payload(const CrispModel& m) {
  json fns = json::array();
  for (const auto& f : m.functions) {
    fns.push_back({{"boundary", f.boundary_id},
                   {"weights", {f.weights(0), f.weights(1), f.weights(2)}}});
  }
  return {{"format_version", kModelFormatVersion},
          {"kind", "crisp"},
          {"label_space", {{"names", m.label_space.names()}, {"separator", m.label_space.separator()}}},
          {"functions", fns}};
}

json payload(const FuzzyModel& m) {
  json rules = json::array();
  for (std::size_t i = 0; i < m.memberships.size(); ++i) {
    const auto& g = m.memberships[i];
    rules.push_back({{"mean", {g.mean(0), g.mean(1)}},
                     {"covariance", {g.covariance(0, 0), g.covariance(0, 1), g.covariance(1, 1)}},
                     {"center", m.centers[i]}});
  }
  return {{"format_version", kModelFormatVersion},
          {"kind", "fuzzy"},
          {"label_space", {{"names", m.label_space.names()}, {"separator", m.label_space.separator()}}},
          {"rules", rules}};
}

LabelSpace read_space(const json& j) {
  return LabelSpace(j.at("names").get<std::vector<std::string>>(), j.at("separator").get<std::string>());
}

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string serialize_model(const Model& model) {
  std::visit([](const auto& m) { validate(m); }, model);
  json j = std::visit([](const auto& m) { return payload(m); }, model);
  j["checksum"] = hex64(fnv1a64(j.dump()));
  return j.dump() + "\n";
}

Model parse_model(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(std::string("corrupted model file: ") + e.what());
  }
  try {
    if (!j.is_object() || !j.contains("checksum")) throw Error("model file has no checksum");
    const auto stored = j.at("checksum").get<std::string>();
    j.erase("checksum");
    if (stored != hex64(fnv1a64(j.dump()))) throw Error("model checksum mismatch (corrupted file)");

    const int version = j.at("format_version").get<int>();
    if (version != kModelFormatVersion) {
      throw Error("unsupported model format_version " + std::to_string(version));
    }
    const auto kind = j.at("kind").get<std::string>();
    auto space = read_space(j.at("label_space"));
    if (kind == "crisp") {
      CrispModel m{space, {}};
      for (const auto& f : j.at("functions")) {
        const auto w = f.at("weights").get<std::vector<double>>();
        if (w.size() != 3) throw Error("crisp weights need 3 entries");
        m.functions.push_back({Eigen::Vector3d(w[0], w[1], w[2]), f.at("boundary").get<std::string>()});
      }
      validate(m);
      return m;
    }
    if (kind == "fuzzy") {
      FuzzyModel m{space, {}, {}};
      for (const auto& r : j.at("rules")) {
        const auto mu = r.at("mean").get<std::vector<double>>();
        const auto cov = r.at("covariance").get<std::vector<double>>();
        if (mu.size() != 2 || cov.size() != 3) throw Error("fuzzy rule has malformed parameters");
        GaussianMembership g;
        g.mean = {mu[0], mu[1]};
        g.covariance << cov[0], cov[1], cov[1], cov[2];
        m.memberships.push_back(g);
        m.centers.push_back(r.at("center").get<double>());
      }
      validate(m);
      return m;
    }
    throw Error("unknown model kind '" + kind + "'");
  } catch (const json::exception& e) {
    throw Error(std::string("malformed model file: ") + e.what());
  }
}

std::size_t save_model(const Model& model, const std::filesystem::path& path) {
  const auto text = serialize_model(model);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed for " + path.string());
  return text.size();
}

Model load_model(const std::filesystem::path& path) { return parse_model(read_text_file(path)); }

const LabelSpace& label_space(const Model& model) {
  return std::visit([](const auto& m) -> const LabelSpace& { return m.label_space; }, model);
}

SizeClass classify(const Model& model, const FeatureVector& x) {
  return std::visit(overloaded{[&](const CrispModel& m) { return classify_crisp(m, x); },
                               [&](const FuzzyModel& m) { return classify_fuzzy(m, x); }},
                    model);
}

std::string_view kind_name(const Model& model) {
  return std::holds_alternative<CrispModel>(model) ? "crisp" : "fuzzy";
}

}  // namespace ckim
