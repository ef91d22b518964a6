#include "ckim/cli.hpp"

#include "ckim/crisp.hpp"
#include "ckim/detections.hpp"
#include "ckim/fuzzy.hpp"
#include "ckim/metrics.hpp"
#include "ckim/model_io.hpp"
#include "ckim/synthgen.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <algorithm>
#include <filesystem>
#include <ostream>

namespace ckim {
namespace {

using nlohmann::json;

struct LabelOptions {
  std::size_t classes = 3;
  std::vector<std::string> labels;
  std::string separator = " ";

  void add_to(CLI::App& cmd) {
    cmd.add_option("--classes", classes, "Number of size classes (2 or 3)")->check(CLI::Range(2, 3));
    cmd.add_option("--labels", labels, "Size names, smallest first (overrides --classes)")->delimiter(',');
    cmd.add_option("--separator", separator, "Separator between size name and coarse label");
  }

  [[nodiscard]] LabelSpace space() const {
    return labels.empty() ? LabelSpace::standard(classes, separator) : LabelSpace(labels, separator);
  }
};

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json report_json(const AuditReport& r) {
  return {{"knowledge1_validity", optional_json(r.knowledge1_validity)},
          {"knowledge1_pairs", r.knowledge1_pairs},
          {"knowledge1_valid", r.knowledge1_valid},
          {"knowledge2_validity", optional_json(r.knowledge2_validity)},
          {"knowledge2_pairs", r.knowledge2_pairs},
          {"knowledge2_valid", r.knowledge2_valid},
          {"depth_tolerance", r.depth_tolerance}};
}

json report_json(const EvalReport& r) {
  json j{{"size_accuracy", r.size_accuracy},
         {"fine_label_accuracy", r.fine_label_accuracy},
         {"confusion", r.confusion},
         {"map50", optional_json(r.map50)},
         {"truth_count", r.truth_count},
         {"prediction_count", r.prediction_count},
         {"matched", r.matched}};
  if (r.mean_latency_us) j["mean_latency_us"] = *r.mean_latency_us;
  if (r.model_bytes) j["model_bytes"] = *r.model_bytes;
  return j;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Size-related fine-grained labels from coarse detections"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "Generate a synthetic labelled detection dataset");
  int gen_images = 100;
  std::uint64_t gen_seed = 0;
  std::string gen_out;
  std::string gen_preset = "well-separated";
  std::string gen_manifest;
  std::size_t gen_classes = 3;
  bool gen_top_down = false;
  SceneSpec overrides;
  std::vector<double> gen_radii;
  gen->add_option("--images", gen_images, "Number of images")->check(CLI::PositiveNumber);
  auto* seed_opt = gen->add_option("--seed", gen_seed, "Generator seed");
  gen->add_option("--out", gen_out, "Output JSONL path (manifest written alongside)")->required();
  gen->add_option("--preset", gen_preset, "Scene preset")
      ->check(CLI::IsMember({"well-separated", "ambiguous"}));
  gen->add_option("--manifest", gen_manifest, "Regenerate from a saved manifest")->check(CLI::ExistingFile);
  gen->add_option("--classes", gen_classes, "Number of size classes")->check(CLI::Range(2, 3));
  gen->add_flag("--top-down", gen_top_down, "Camera looks straight down at the objects");
  auto* o_height = gen->add_option("--camera-height", overrides.camera_height);
  auto* o_focal = gen->add_option("--focal-length", overrides.focal_length);
  auto* o_aspect = gen->add_option("--aspect", overrides.image_aspect);
  auto* o_horizon = gen->add_option("--horizon", overrides.horizon_y);
  auto* o_jitter = gen->add_option("--size-jitter", overrides.size_jitter);
  auto* o_noise = gen->add_option("--box-noise", overrides.box_noise);
  auto* o_zmin = gen->add_option("--depth-min", overrides.depth_min);
  auto* o_zmax = gen->add_option("--depth-max", overrides.depth_max);
  auto* o_lateral = gen->add_option("--lateral-range", overrides.lateral_range);
  auto* o_objects = gen->add_option("--objects-per-image", overrides.objects_per_image);
  auto* o_radii = gen->add_option("--radii", gen_radii, "Class radii, smallest first")->delimiter(',');

  // train
  auto* train = app.add_subcommand("train", "Fit a crisp or fuzzy size model");
  std::string train_kind;
  std::string train_data;
  std::string train_out;
  SgdConfig sgd;
  LabelOptions train_labels;
  train->add_option("--kind", train_kind, "crisp or fuzzy")->required()->check(CLI::IsMember({"crisp", "fuzzy"}));
  train->add_option("--data", train_data, "Labelled detection JSONL")->required()->check(CLI::ExistingFile);
  train->add_option("--out", train_out, "Model JSON path")->required();
  train->add_option("--lr", sgd.learning_rate, "SGD learning rate")->check(CLI::PositiveNumber);
  train->add_option("--epochs", sgd.epochs, "SGD epochs")->check(CLI::PositiveNumber);
  train->add_option("--batch-size", sgd.batch_size, "SGD mini-batch size")->check(CLI::PositiveNumber);
  train->add_option("--seed", sgd.rng_seed, "SGD shuffling seed");
  train_labels.add_to(*train);

  // infer
  auto* infer = app.add_subcommand("infer", "Append fine labels to coarse detections");
  std::string infer_model;
  std::string infer_in;
  std::string infer_out;
  infer->add_option("--model", infer_model, "Model JSON")->required()->check(CLI::ExistingFile);
  infer->add_option("--detections", infer_in, "Coarse detection JSONL")->required()->check(CLI::ExistingFile);
  infer->add_option("--out", infer_out, "Output JSONL")->required();

  // evaluate
  auto* eval = app.add_subcommand("evaluate", "Score fine-labelled predictions against ground truth");
  std::string eval_pred;
  std::string eval_truth;
  std::string eval_model;
  EvalConfig eval_cfg;
  bool eleven = false;
  std::size_t latency_reps = 10000;
  LabelOptions eval_labels;
  eval->add_option("--pred", eval_pred, "Predictions JSONL")->required()->check(CLI::ExistingFile);
  eval->add_option("--truth", eval_truth, "Ground truth JSONL")->required()->check(CLI::ExistingFile);
  eval->add_option("--iou", eval_cfg.iou_threshold, "IoU match threshold")->check(CLI::Range(0.0, 1.0));
  eval->add_flag("--eleven-point", eleven, "11-point interpolated AP instead of all points");
  eval->add_option("--model", eval_model, "Model to benchmark (also fixes the label space)")
      ->check(CLI::ExistingFile);
  eval->add_option("--latency-reps", latency_reps, "Inferences timed for the latency figure")
      ->check(CLI::Range(std::size_t{10000}, std::size_t{100000000}));
  eval_labels.add_to(*eval);

  // audit
  auto* audit = app.add_subcommand("audit", "Measure how often the size heuristics hold on a dataset");
  std::string audit_data;
  double depth_tol = -1.0;
  LabelOptions audit_labels;
  audit->add_option("--data", audit_data, "Labelled detection JSONL")->required()->check(CLI::ExistingFile);
  audit->add_option("--depth-tolerance", depth_tol, "Equal-distance tolerance (default 1% of range)");
  audit_labels.add_to(*audit);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (*gen) {
      SceneSpec spec;
      int images = gen_images;
      if (!gen_manifest.empty()) {
        std::tie(spec, images) = parse_manifest(read_text_file(gen_manifest));
      } else {
        spec = gen_preset == "ambiguous" ? SceneSpec::ambiguous(gen_classes) : SceneSpec::well_separated(gen_classes);
        spec.top_down = gen_top_down;
        if (o_height->count()) spec.camera_height = overrides.camera_height;
        if (o_focal->count()) spec.focal_length = overrides.focal_length;
        if (o_aspect->count()) spec.image_aspect = overrides.image_aspect;
        if (o_horizon->count()) spec.horizon_y = overrides.horizon_y;
        if (o_jitter->count()) spec.size_jitter = overrides.size_jitter;
        if (o_noise->count()) spec.box_noise = overrides.box_noise;
        if (o_zmin->count()) spec.depth_min = overrides.depth_min;
        if (o_zmax->count()) spec.depth_max = overrides.depth_max;
        if (o_lateral->count()) spec.lateral_range = overrides.lateral_range;
        if (o_objects->count()) spec.objects_per_image = overrides.objects_per_image;
        if (o_radii->count()) spec.class_radii = gen_radii;
      }
      if (seed_opt->count()) spec.rng_seed = gen_seed;
      const auto ds = generate(spec, images);
      save_dataset(gen_out, ds);
      std::size_t n = 0;
      for (const auto& img : ds.images) n += img.records.size();
      out << "wrote " << n << " detections in " << ds.images.size() << " images to " << gen_out << "\n";
    } else if (*train) {
      const auto space = train_labels.space();
      const auto set = load_detections(train_data, space);
      const auto samples = labeled_features(to_image_detections(set.images));
      Model model = train_kind == "crisp" ? Model{train_crisp(samples, space, sgd)}
                                          : Model{fit_fuzzy(samples, space)};
      const auto bytes = save_model(model, train_out);
      out << "trained " << train_kind << " model on " << samples.size() << " samples; wrote " << bytes
          << " bytes to " << train_out << "\n";
    } else if (*infer) {
      const auto model = load_model(infer_model);
      const auto& space = label_space(model);
      auto set = load_detections(infer_in, space);
      for (auto& img : set.images) {
        for (auto& d : img.detections) {
          const auto size = classify(model, extract_features(d.record.box));
          d.fine_label = compose_fine_label(d.record.coarse_label, size, space);
        }
      }
      save_detections(infer_out, set.images, space);
      out << "labelled " << set.num_detections() << " detections to " << infer_out << "\n";
    } else if (*eval) {
      std::optional<Model> model;
      if (!eval_model.empty()) model = load_model(eval_model);
      const LabelSpace space = model ? label_space(*model) : eval_labels.space();
      const auto pred = load_detections(eval_pred, space);
      const auto truth = load_detections(eval_truth, space);
      eval_cfg.interpolation = eleven ? ApInterpolation::eleven_point : ApInterpolation::all_points;
      auto report = evaluate(pred.images, truth.images, space, eval_cfg);
      if (model) {
        std::vector<BoundingBox> boxes;
        for (const auto& img : truth.images) {
          for (const auto& d : img.detections) boxes.push_back(d.record.box);
        }
        if (!boxes.empty()) report.mean_latency_us = measure_latency_us(*model, boxes, latency_reps);
        report.model_bytes = serialize_model(*model).size();
      }
      out << report_json(report).dump(2) << "\n";
    } else if (*audit) {
      const auto set = load_detections(audit_data, audit_labels.space());
      const auto report = audit_knowledge(to_image_detections(set.images),
                                          depth_tol >= 0.0 ? std::optional<double>(depth_tol) : std::nullopt);
      out << report_json(report).dump(2) << "\n";
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace ckim
