#include "ckim/crisp.hpp"

#include "ckim/random.hpp"

#include <algorithm>
#include <numeric>

namespace ckim {
namespace {

std::string boundary_name(const LabelSpace& space, std::size_t boundary) {
  std::string id;
  id += space.names()[boundary].front();
  id += space.names()[boundary + 1].front();
  return id;
}

// Per-feature shift and scale. SGD runs on standardized features so the tiny
// BoxS values do not stall the step size; the learned weights are mapped back
// to raw features afterwards, which leaves the decision function unchanged.
struct Standardizer {
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  Eigen::Vector2d scale = Eigen::Vector2d::Ones();

  static Standardizer fit(std::span<const BinarySample> data) {
    Standardizer s;
    Eigen::Vector2d sum = Eigen::Vector2d::Zero();
    for (const auto& d : data) sum += d.x.vec();
    s.mean = sum / static_cast<double>(data.size());
    Eigen::Vector2d sq = Eigen::Vector2d::Zero();
    for (const auto& d : data) sq += (d.x.vec() - s.mean).cwiseAbs2();
    s.scale = (sq / static_cast<double>(data.size())).cwiseSqrt();
    for (int i = 0; i < 2; ++i) {
      if (!(s.scale(i) > 0.0)) s.scale(i) = 1.0;
    }
    return s;
  }

  [[nodiscard]] Eigen::Vector2d apply(const FeatureVector& x) const {
    return (x.vec() - mean).cwiseQuotient(scale);
  }

  [[nodiscard]] Eigen::Vector3d to_raw(const Eigen::Vector3d& v) const {
    Eigen::Vector3d w;
    w.head<2>() = v.head<2>().cwiseQuotient(scale);
    w(2) = v(2) - w.head<2>().dot(mean);
    return w;
  }
};

Eigen::Vector3d train_boundary(std::span<const BinarySample> data, const SgdConfig& cfg, Rng& rng,
                               std::vector<double>* epoch_loss) {
  const auto st = Standardizer::fit(data);
  std::vector<Eigen::Vector2d> z(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) z[i] = st.apply(data[i].x);

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Eigen::Vector3d v = Eigen::Vector3d::Zero();
  const auto batch = static_cast<std::size_t>(cfg.batch_size);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t stop = std::min(order.size(), start + batch);
      Eigen::Vector3d grad = Eigen::Vector3d::Zero();
      for (std::size_t k = start; k < stop; ++k) {
        const std::size_t i = order[k];
        const double err = logistic(logit<double>(v, z[i])) - data[i].target;
        grad.head<2>() += err * z[i];
        grad(2) += err;
      }
      v -= cfg.learning_rate * grad / static_cast<double>(stop - start);
    }
    double loss = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      loss += clamped_cross_entropy(logistic(logit<double>(v, z[i])), data[i].target);
    }
    loss /= static_cast<double>(data.size());
    if (!std::isfinite(loss) || !v.allFinite()) {
      throw Error("crisp training diverged (non-finite loss); lower the learning rate");
    }
    if (epoch_loss) epoch_loss->push_back(loss);
  }
  return st.to_raw(v);
}

}  // namespace

void validate(const CrispModel& model) {
  if (model.functions.size() + 1 != model.label_space.size()) {
    throw Error("crisp model needs exactly K-1 decision functions");
  }
  for (const auto& f : model.functions) {
    if (!f.weights.allFinite()) throw Error("crisp model has non-finite weights");
  }
}

double sigmoid_decision(const CrispDecisionFunction& f, const FeatureVector& x) {
  return logistic(logit<double>(f.weights, x.vec()));
}

double crisp_loss(const CrispDecisionFunction& f, std::span<const BinarySample> data) {
  double total = 0.0;
  for (const auto& d : data) total += clamped_cross_entropy(sigmoid_decision(f, d.x), d.target);
  return total;
}

Eigen::Vector3d crisp_loss_gradient(const CrispDecisionFunction& f,
                                    std::span<const BinarySample> data) {
  Eigen::Vector3d grad = Eigen::Vector3d::Zero();
  for (const auto& d : data) {
    const double err = sigmoid_decision(f, d.x) - d.target;
    grad += err * Eigen::Vector3d(d.x.box_s, d.x.dtoc_proxy, 1.0);
  }
  return grad;
}

std::vector<BinarySample> boundary_targets(std::span<const LabeledFeature> data,
                                           std::size_t boundary) {
  std::vector<BinarySample> out;
  out.reserve(data.size());
  for (const auto& d : data) out.push_back({d.x, d.size.index > boundary ? 1.0 : 0.0});
  return out;
}

CrispModel train_crisp(std::span<const LabeledFeature> data, const LabelSpace& space,
                       const SgdConfig& cfg, CrispTrainingLog* log) {
  if (!(cfg.learning_rate > 0.0) || cfg.epochs <= 0 || cfg.batch_size <= 0) {
    throw Error("SGD learning rate, epochs and batch size must be positive");
  }
  std::vector<std::size_t> counts(space.size(), 0);
  for (const auto& d : data) {
    if (d.size.index >= space.size()) throw Error("training sample has an out-of-range size class");
    ++counts[d.size.index];
  }
  for (std::size_t k = 0; k < counts.size(); ++k) {
    if (counts[k] == 0) throw Error("size class '" + space.names()[k] + "' missing from training data");
  }

  CrispModel model{space, {}};
  Rng rng(cfg.rng_seed);
  if (log) log->epoch_loss.clear();
  for (std::size_t b = space.size() - 1; b-- > 0;) {
    const auto targets = boundary_targets(data, b);
    std::vector<double>* trace = nullptr;
    if (log) trace = &log->epoch_loss.emplace_back();
    model.functions.push_back({train_boundary(targets, cfg, rng, trace), boundary_name(space, b)});
  }
  return model;
}

SizeClass apply_rule_chain(std::span<const double> decisions) {
  const std::size_t top = decisions.size();
  for (std::size_t i = 0; i < decisions.size(); ++i) {
    if (decisions[i] > 0.5) return SizeClass{top - i};
  }
  return SizeClass{0};
}

SizeClass classify_crisp(const CrispModel& model, const FeatureVector& x) {
  const std::size_t top = model.functions.size();
  for (std::size_t i = 0; i < top; ++i) {
    if (sigmoid_decision(model.functions[i], x) > 0.5) return SizeClass{top - i};
  }
  return SizeClass{0};
}

}  // namespace ckim
