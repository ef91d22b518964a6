#include "ckim/cli.hpp"
#include "ckim/detections.hpp"

#include "doctest.h"
#include "json.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace ckim;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  [[nodiscard]] std::string operator/(const std::string& f) const { return (path / f).string(); }
};

}  // namespace

TEST_CASE("generate is reproducible") {
  TempDir dir("ckim_cli_gen");
  REQUIRE(cli({"generate", "--images", "100", "--seed", "7", "--out", dir / "a.jsonl"}).code == 0);
  REQUIRE(cli({"generate", "--images", "100", "--seed", "7", "--out", dir / "b.jsonl"}).code == 0);
  REQUIRE(cli({"generate", "--images", "100", "--seed", "8", "--out", dir / "c.jsonl"}).code == 0);
  CHECK(read_text_file(dir / "a.jsonl") == read_text_file(dir / "b.jsonl"));
  CHECK(read_text_file(dir / "a.jsonl") != read_text_file(dir / "c.jsonl"));
  CHECK(read_text_file(dir / "a.jsonl.manifest.json") == read_text_file(dir / "b.jsonl.manifest.json"));

  REQUIRE(cli({"generate", "--manifest", dir / "a.jsonl.manifest.json", "--out", dir / "d.jsonl"}).code == 0);
  CHECK(read_text_file(dir / "d.jsonl") == read_text_file(dir / "a.jsonl"));
}

TEST_CASE("train, infer and evaluate round trip") {
  TempDir dir("ckim_cli_pipeline");
  REQUIRE(cli({"generate", "--images", "500", "--seed", "1", "--out", dir / "train.jsonl"}).code == 0);
  REQUIRE(cli({"generate", "--images", "100", "--seed", "2", "--out", dir / "test.jsonl"}).code == 0);

  for (const std::string kind : {"fuzzy", "crisp"}) {
    CAPTURE(kind);
    const auto model = dir / (kind + ".json");
    const auto pred = dir / (kind + "_pred.jsonl");
    const auto t = cli({"train", "--kind", kind, "--data", dir / "train.jsonl", "--out", model});
    REQUIRE(t.code == 0);
    CHECK(fs::file_size(model) <= 2048);

    REQUIRE(cli({"infer", "--model", model, "--detections", dir / "test.jsonl", "--out", pred}).code == 0);
    const auto set = load_detections(pred, LabelSpace::standard(3));
    CHECK(set.num_detections() == 400);
    for (const auto& img : set.images) {
      for (const auto& d : img.detections) {
        REQUIRE(d.fine_label.has_value());
        const auto [coarse, size] = decompose_fine_label(*d.fine_label, LabelSpace::standard(3));
        CHECK(coarse == d.record.coarse_label);
      }
    }

    const auto e = cli({"evaluate", "--pred", pred, "--truth", dir / "test.jsonl", "--model", model});
    REQUIRE(e.code == 0);
    const auto report = nlohmann::json::parse(e.out);
    CHECK(report.at("size_accuracy").get<double>() >= 0.99);
    CHECK(report.at("map50").get<double>() >= 0.99);
    CHECK(report.at("model_bytes").get<std::size_t>() <= 2048);
    CHECK(report.at("mean_latency_us").get<double>() <= 1000.0);
  }
}

TEST_CASE("custom label names flow through training and inference") {
  TempDir dir("ckim_cli_labels");
  REQUIRE(cli({"generate", "--images", "100", "--classes", "2", "--out", dir / "d.jsonl"}).code == 0);
  // The generator writes the standard names; relabel them.
  std::string text = read_text_file(dir / "d.jsonl");
  for (const auto& [from, to] : {std::pair{"\"small\"", "\"S\""}, std::pair{"\"large\"", "\"L\""}}) {
    for (auto pos = text.find(from); pos != std::string::npos; pos = text.find(from, pos)) text.replace(pos, std::strlen(from), to);
  }
  {
    std::ofstream(dir / "custom.jsonl") << text;
  }
  REQUIRE(cli({"train", "--kind", "crisp", "--labels", "S,L", "--separator", "-", "--data", dir / "custom.jsonl",
               "--out", dir / "m.json"})
              .code == 0);
  REQUIRE(cli({"infer", "--model", dir / "m.json", "--detections", dir / "custom.jsonl", "--out", dir / "p.jsonl"}).code == 0);
  const auto p = read_text_file(dir / "p.jsonl");
  CHECK((p.find("\"fine_label\":\"S-") != std::string::npos || p.find("\"fine_label\":\"L-") != std::string::npos));
}

TEST_CASE("audit prints validity figures") {
  TempDir dir("ckim_cli_audit");
  REQUIRE(cli({"generate", "--images", "50", "--out", dir / "d.jsonl"}).code == 0);
  const auto a = cli({"audit", "--data", dir / "d.jsonl"});
  REQUIRE(a.code == 0);
  const auto j = nlohmann::json::parse(a.out);
  CHECK(j.at("knowledge2_validity").get<double>() == 1.0);
}

TEST_CASE("usage errors exit nonzero") {
  TempDir dir("ckim_cli_errors");
  CHECK(cli({}).code != 0);
  CHECK(cli({"train", "--bogus"}).code != 0);
  CHECK(cli({"train", "--kind", "crisp", "--data", dir / "missing.jsonl", "--out", dir / "m.json"}).code != 0);
  CHECK(cli({"generate", "--images", "5", "--out", dir / "x.jsonl", "--box-noise", "0.9"}).code != 0);

  {
    std::ofstream(dir / "bad.jsonl") << "{\"image_id\": \"i\"}\n";
  }
  const auto r = cli({"train", "--kind", "fuzzy", "--data", dir / "bad.jsonl", "--out", dir / "m.json"});
  CHECK(r.code == 1);
  CHECK(r.err.find("line 1") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "m.json"));
}
