#include "ckim/metrics.hpp"
#include "ckim/random.hpp"
#include "oracles.hpp"

#include "doctest.h"

#include <algorithm>

using namespace ckim;

namespace {

std::vector<DetectionImage> truth_set(std::uint64_t seed) {
  auto spec = SceneSpec::ambiguous(3);
  spec.rng_seed = seed;
  return to_detection_images(generate(spec, 50).images);
}

std::vector<DetectionImage> as_predictions(std::vector<DetectionImage> imgs, const LabelSpace& space,
                                           std::size_t size_shift) {
  Rng rng(1);
  for (auto& img : imgs) {
    for (auto& d : img.detections) {
      const SizeClass s{(d.record.truth_size->index + size_shift) % space.size()};
      d.fine_label = compose_fine_label(d.record.coarse_label, s, space);
      d.confidence = rng.uniform();
      d.record.truth_size.reset();
      d.record.truth_distance.reset();
    }
  }
  return imgs;
}

}  // namespace

TEST_CASE("iou") {
  const BoundingBox a{0.5, 0.5, 0.2, 0.2};
  CHECK(iou(a, a) == 1.0);
  CHECK(iou(a, {0.6, 0.5, 0.2, 0.2}) == iou({0.6, 0.5, 0.2, 0.2}, a));
  CHECK(iou(a, {0.9, 0.9, 0.1, 0.1}) == 0.0);
  CHECK(iou(a, {0.6, 0.5, 0.2, 0.2}) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(iou(a, {0.7, 0.5, 0.2, 0.2}) == 0.0);
  CHECK(iou(a, {0.5, 0.5, 0.1, 0.1}) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("average precision on a toy ranking") {
  const std::vector<RankedHit> hits{{0.8, false}, {0.9, true}, {0.7, true}};
  CHECK(average_precision(hits, 2) == doctest::Approx(0.5 + 0.5 * 2.0 / 3.0).epsilon(1e-15));
  CHECK(average_precision(hits, 2) == doctest::Approx(oracle::average_precision(hits, 2)).epsilon(1e-15));
  CHECK(average_precision(hits, 4) == doctest::Approx(oracle::average_precision(hits, 4)).epsilon(1e-15));
  // 11-point: precision 1 at recall 0..0.5, 2/3 at 0.6..1.0.
  CHECK(average_precision(hits, 2, ApInterpolation::eleven_point) ==
        doctest::Approx((6 * 1.0 + 5 * 2.0 / 3.0) / 11.0).epsilon(1e-15));
  CHECK(average_precision({}, 3) == 0.0);
  CHECK(average_precision(hits, 0) == 0.0);
}

TEST_CASE("average precision agrees with the oracle on random rankings") {
  Rng rng(12);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<RankedHit> hits(rng.below(30) + 1);
    std::size_t tp = 0;
    for (auto& h : hits) {
      h = {rng.uniform(), rng.uniform() < 0.6};
      tp += h.true_positive;
    }
    const std::size_t num_truth = tp + rng.below(5);
    if (num_truth == 0) continue;
    CHECK(average_precision(hits, num_truth) == doctest::Approx(oracle::average_precision(hits, num_truth)).epsilon(1e-12));
  }
}

TEST_CASE("perfect and flipped predictions") {
  const auto space = LabelSpace::standard(3);
  const auto truth = truth_set(2);

  const auto perfect = evaluate(as_predictions(truth, space, 0), truth, space);
  CHECK(perfect.size_accuracy == 1.0);
  CHECK(perfect.fine_label_accuracy == 1.0);
  REQUIRE(perfect.map50.has_value());
  CHECK(*perfect.map50 == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(perfect.matched == perfect.truth_count);
  CHECK(perfect.truth_count == 200);

  const auto flipped = evaluate(as_predictions(truth, space, 1), truth, space);
  CHECK(flipped.size_accuracy == 0.0);
  CHECK(flipped.matched == flipped.truth_count);
  CHECK(*flipped.map50 == 0.0);
  std::size_t diag = 0;
  for (std::size_t i = 0; i < 3; ++i) diag += flipped.confusion[i][i];
  CHECK(diag == 0);

  const auto eleven = evaluate(as_predictions(truth, space, 0), truth, space,
                               {0.5, ApInterpolation::eleven_point});
  CHECK(*eleven.map50 == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("deleting true positives never raises mAP") {
  const auto space = LabelSpace::standard(3);
  const auto truth = truth_set(3);
  auto pred = as_predictions(truth, space, 0);
  // Corrupt a third of the sizes so the ranking mixes hits and misses.
  Rng rng(4);
  for (auto& img : pred) {
    for (auto& d : img.detections) {
      if (rng.uniform() < 0.33) d.fine_label = compose_fine_label(d.record.coarse_label, SizeClass{rng.below(3)}, space);
    }
  }
  double prev = *evaluate(pred, truth, space).map50;
  for (int round = 0; round < 30; ++round) {
    bool removed = false;
    for (std::size_t i = 0; i < pred.size() && !removed; ++i) {
      auto& dets = pred[(i + 7 * round) % pred.size()].detections;
      const auto& gt = truth[(i + 7 * round) % pred.size()].detections;
      for (std::size_t j = 0; j < dets.size(); ++j) {
        const auto want = compose_fine_label(gt[j].record.coarse_label, *gt[j].record.truth_size, space);
        if (*dets[j].fine_label == want) {
          dets.erase(dets.begin() + static_cast<long>(j));
          removed = true;
          break;
        }
      }
      if (removed) break;
    }
    if (!removed) break;
    const double cur = *evaluate(pred, truth, space).map50;
    CHECK(cur <= prev + 1e-15);
    prev = cur;
  }
}

TEST_CASE("matching respects the IoU threshold and image ids") {
  const auto space = LabelSpace::standard(2);
  std::vector<DetectionImage> truth{{"a", {}, {}, {{{"cup", {0.5, 0.5, 0.2, 0.2}, SizeClass{1}, {}}, 1.0, {}}}}};
  auto pred = truth;
  pred[0].detections[0].record.truth_size.reset();
  pred[0].detections[0].fine_label = "large cup";
  pred[0].detections[0].record.box = {0.6, 0.5, 0.2, 0.2};
  CHECK(evaluate(pred, truth, space).matched == 0);
  CHECK(evaluate(pred, truth, space, {0.3, ApInterpolation::all_points}).matched == 1);
  pred[0].image_id = "b";
  CHECK(evaluate(pred, truth, space, {0.3, ApInterpolation::all_points}).matched == 0);
}

TEST_CASE("label-space mismatch is reported") {
  const auto k3 = LabelSpace::standard(3);
  const auto truth = truth_set(5);
  const auto pred = as_predictions(truth, k3, 0);
  CHECK_THROWS_WITH_AS((void)evaluate(pred, truth, LabelSpace::standard(2)), doctest::Contains("label-space"), Error);
  auto unlabeled = pred;
  unlabeled[0].detections[0].fine_label.reset();
  CHECK_THROWS_AS((void)evaluate(unlabeled, truth, k3), Error);
}

TEST_CASE("per-object latency stays under a millisecond") {
  auto spec = SceneSpec::ambiguous(3);
  const auto data = labeled_features(generate(spec, 200).images);
  const auto space = LabelSpace::standard(3);
  std::vector<BoundingBox> boxes;
  for (const auto& img : generate(spec, 50).images) {
    for (const auto& r : img.records) boxes.push_back(r.box);
  }
  for (const Model& m : {Model{train_crisp(data, space, {0.1, 10, 32, 0})}, Model{fit_fuzzy(data, space)}}) {
    const double us = measure_latency_us(m, boxes, 10000);
    CHECK(us > 0.0);
    CHECK(us <= 1000.0);
  }
  CHECK_THROWS_AS((void)measure_latency_us(Model{fit_fuzzy(data, space)}, {}, 10), Error);
}

TEST_CASE("iou identities on random boxes") {
  Rng rng(30);
  for (int i = 0; i < 2000; ++i) {
    const BoundingBox a{rng.uniform(), rng.uniform(), rng.uniform(0.001, 1), rng.uniform(0.001, 1)};
    const BoundingBox b{rng.uniform(), rng.uniform(), rng.uniform(0.001, 1), rng.uniform(0.001, 1)};
    CHECK(iou(a, a) == 1.0);
    CHECK(iou(a, b) == iou(b, a));
    CHECK(iou(a, b) >= 0.0);
    CHECK(iou(a, b) <= 1.0);
  }
}

TEST_CASE("two-class flip and confidence-1 self evaluation") {
  const auto k2 = LabelSpace::standard(2);
  auto spec = SceneSpec::well_separated(2);
  spec.rng_seed = 8;
  const auto truth = to_detection_images(generate(spec, 100).images);

  auto same = as_predictions(truth, k2, 0);
  for (auto& img : same) {
    for (auto& d : img.detections) d.confidence = 1.0;
  }
  const auto perfect = evaluate(same, truth, k2);
  CHECK(perfect.size_accuracy == 1.0);
  CHECK(*perfect.map50 == 1.0);

  const auto flipped = evaluate(as_predictions(truth, k2, 1), truth, k2);
  CHECK(flipped.size_accuracy == 0.0);

  std::vector<std::size_t> per_class(2, 0);
  for (const auto& img : truth) {
    for (const auto& d : img.detections) ++per_class[d.record.truth_size->index];
  }
  for (std::size_t r = 0; r < 2; ++r) CHECK(flipped.confusion[r][0] + flipped.confusion[r][1] == per_class[r]);
}
