#include "ckim/metrics.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <set>
#include <unordered_map>

namespace ckim {
namespace {

struct PredRef {
  std::size_t image = 0;  // index into ground truth images, or npos
  const Detection* det = nullptr;
  std::string coarse;
  SizeClass size;
};

// Best unmatched truth in `truths` accepted by `eligible`, or -1.
template <typename Eligible>
long best_match(const BoundingBox& box, const std::vector<Detection>& truths,
                const std::vector<bool>& used, double threshold, Eligible eligible) {
  long best = -1;
  double best_iou = threshold;
  for (std::size_t t = 0; t < truths.size(); ++t) {
    if (used[t] || !eligible(truths[t])) continue;
    const double v = iou(box, truths[t].record.box);
    if (v > best_iou) {
      best_iou = v;
      best = static_cast<long>(t);
    }
  }
  return best;
}

void sort_by_confidence(std::vector<PredRef>& preds) {
  std::stable_sort(preds.begin(), preds.end(), [](const PredRef& a, const PredRef& b) {
    return a.det->confidence > b.det->confidence;
  });
}

}  // namespace

double iou(const BoundingBox& a, const BoundingBox& b) noexcept {
  const double w = std::min(a.right(), b.right()) - std::max(a.left(), b.left());
  const double h = std::min(a.bottom(), b.bottom()) - std::max(a.top(), b.top());
  if (w <= 0.0 || h <= 0.0) return 0.0;
  // Areas from the same edges as the intersection, so iou(a, a) is exactly 1.
  const double inter = w * h;
  const double area_a = (a.right() - a.left()) * (a.bottom() - a.top());
  const double area_b = (b.right() - b.left()) * (b.bottom() - b.top());
  const double uni = area_a + area_b - inter;
  return uni > 0.0 ? std::clamp(inter / uni, 0.0, 1.0) : 0.0;
}

double average_precision(std::vector<RankedHit> hits, std::size_t num_truth,
                         ApInterpolation interpolation) {
  if (num_truth == 0) return 0.0;
  std::stable_sort(hits.begin(), hits.end(),
                   [](const RankedHit& a, const RankedHit& b) { return a.confidence > b.confidence; });
  std::vector<double> recall(hits.size());
  std::vector<double> precision(hits.size());
  std::size_t tp = 0;
  for (std::size_t i = 0; i < hits.size(); ++i) {
    if (hits[i].true_positive) ++tp;
    recall[i] = static_cast<double>(tp) / static_cast<double>(num_truth);
    precision[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
  }

  if (interpolation == ApInterpolation::eleven_point) {
    double sum = 0.0;
    for (int t = 0; t <= 10; ++t) {
      const double level = t / 10.0;
      double best = 0.0;
      for (std::size_t i = 0; i < hits.size(); ++i) {
        if (recall[i] >= level) best = std::max(best, precision[i]);
      }
      sum += best;
    }
    return sum / 11.0;
  }

  for (std::size_t i = hits.size(); i-- > 1;) precision[i - 1] = std::max(precision[i - 1], precision[i]);
  double ap = 0.0;
  double prev_recall = 0.0;
  for (std::size_t i = 0; i < hits.size(); ++i) {
    ap += (recall[i] - prev_recall) * precision[i];
    prev_recall = recall[i];
  }
  return ap;
}

EvalReport evaluate(std::span<const DetectionImage> predictions,
                    std::span<const DetectionImage> ground_truth, const LabelSpace& space,
                    const EvalConfig& cfg) {
  const std::size_t k = space.size();
  EvalReport rep;
  rep.confusion.assign(k, std::vector<std::size_t>(k, 0));

  std::unordered_map<std::string, std::size_t> image_index;
  std::map<std::string, std::size_t> truth_per_class;
  for (std::size_t i = 0; i < ground_truth.size(); ++i) {
    image_index.emplace(ground_truth[i].image_id, i);
    for (const auto& t : ground_truth[i].detections) {
      if (!t.record.truth_size) {
        throw Error("ground truth in image " + ground_truth[i].image_id + " lacks truth_size");
      }
      if (t.record.truth_size->index >= k) throw Error("label-space mismatch: truth_size out of range");
      ++truth_per_class[compose_fine_label(t.record.coarse_label, *t.record.truth_size, space)];
      ++rep.truth_count;
    }
  }

  constexpr std::size_t npos = static_cast<std::size_t>(-1);
  std::vector<PredRef> preds;
  for (const auto& img : predictions) {
    const auto it = image_index.find(img.image_id);
    for (const auto& d : img.detections) {
      if (!d.fine_label) throw Error("prediction in image " + img.image_id + " has no fine_label");
      std::pair<std::string, SizeClass> parts;
      try {
        parts = decompose_fine_label(*d.fine_label, space);
      } catch (const Error&) {
        throw Error("label-space mismatch: prediction '" + *d.fine_label +
                    "' does not use the size names of the ground truth");
      }
      preds.push_back({it == image_index.end() ? npos : it->second, &d, d.record.coarse_label,
                       parts.second});
      ++rep.prediction_count;
    }
  }
  sort_by_confidence(preds);

  // Size accuracy: match on coarse label.
  std::vector<std::vector<bool>> used(ground_truth.size());
  for (std::size_t i = 0; i < ground_truth.size(); ++i) used[i].assign(ground_truth[i].detections.size(), false);
  std::size_t size_ok = 0;
  std::size_t fine_ok = 0;
  for (const auto& p : preds) {
    if (p.image == npos) continue;
    const auto& truths = ground_truth[p.image].detections;
    const long m = best_match(p.det->record.box, truths, used[p.image], cfg.iou_threshold,
                              [&](const Detection& t) { return t.record.coarse_label == p.coarse; });
    if (m < 0) continue;
    used[p.image][static_cast<std::size_t>(m)] = true;
    ++rep.matched;
    const auto& truth = truths[static_cast<std::size_t>(m)].record;
    ++rep.confusion[truth.truth_size->index][p.size.index];
    if (*truth.truth_size == p.size) ++size_ok;
    if (*p.det->fine_label == compose_fine_label(truth.coarse_label, *truth.truth_size, space)) ++fine_ok;
  }
  rep.size_accuracy = rep.matched ? static_cast<double>(size_ok) / static_cast<double>(rep.matched) : 0.0;
  rep.fine_label_accuracy =
      rep.truth_count ? static_cast<double>(fine_ok) / static_cast<double>(rep.truth_count) : 0.0;

  // AP per fine class: match on fine label.
  if (truth_per_class.empty()) return rep;
  std::map<std::string, std::vector<RankedHit>> hits;
  for (auto& u : used) std::fill(u.begin(), u.end(), false);
  for (const auto& p : preds) {
    const std::string& label = *p.det->fine_label;
    if (!truth_per_class.contains(label)) continue;
    bool tp = false;
    if (p.image != npos) {
      const auto& truths = ground_truth[p.image].detections;
      const long m = best_match(p.det->record.box, truths, used[p.image], cfg.iou_threshold,
                                [&](const Detection& t) {
                                  return compose_fine_label(t.record.coarse_label, *t.record.truth_size,
                                                            space) == label;
                                });
      if (m >= 0) {
        used[p.image][static_cast<std::size_t>(m)] = true;
        tp = true;
      }
    }
    hits[label].push_back({p.det->confidence, tp});
  }
  double sum = 0.0;
  for (const auto& [label, n] : truth_per_class) {
    const double ap = average_precision(hits[label], n, cfg.interpolation);
    rep.ap_per_class[label] = ap;
    sum += ap;
  }
  rep.map50 = sum / static_cast<double>(truth_per_class.size());
  return rep;
}

double measure_latency_us(const Model& model, std::span<const BoundingBox> boxes,
                          std::size_t repetitions) {
  if (boxes.empty() || repetitions == 0) throw Error("latency benchmark needs boxes and repetitions");
  std::size_t sink = 0;
  const auto start = std::chrono::steady_clock::now();
  for (std::size_t i = 0; i < repetitions; ++i) {
    sink += classify(model, extract_features(boxes[i % boxes.size()])).index;
  }
  const auto stop = std::chrono::steady_clock::now();
  static volatile std::size_t keep;
  keep = keep + sink;
  const double us = std::chrono::duration<double, std::micro>(stop - start).count();
  return us / static_cast<double>(repetitions);
}

}  // namespace ckim
