#pragma once

// Crisp-rule size inference: K-1 cumulative logistic decision functions over
// (BoxS, CtoB) chained top-down. Boundary j separates classes <= j from > j,
// and the first boundary whose decision value exceeds 0.5 fixes the label.

#include "ckim/core.hpp"

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace ckim {

/// Logit of an augmented linear model, w . [x, 1].
template <typename Scalar>
Scalar logit(const Eigen::Matrix<Scalar, 3, 1>& w, const Eigen::Matrix<Scalar, 2, 1>& x) {
  return w.template head<2>().dot(x) + w(2);
}

/// 1 / (1 + exp(-z)) without overflow for large |z|.
template <typename Scalar>
Scalar logistic(Scalar z) {
  using std::exp;
  if (z >= Scalar(0)) return Scalar(1) / (Scalar(1) + exp(-z));
  const Scalar e = exp(z);
  return e / (Scalar(1) + e);
}

/// Cross-entropy of one prediction with the probability clamped to
/// [1e-12, 1 - 1e-12] so the loss stays finite.
template <typename Scalar>
Scalar clamped_cross_entropy(Scalar prob, Scalar target) {
  using std::log;
  const Scalar eps(1e-12);
  const Scalar p = prob < eps ? eps : (prob > Scalar(1) - eps ? Scalar(1) - eps : prob);
  return -target * log(p) - (Scalar(1) - target) * log(Scalar(1) - p);
}

struct CrispDecisionFunction {
  /// (w_box_s, w_dtoc, bias).
  Eigen::Vector3d weights = Eigen::Vector3d::Zero();
  /// Initials of the lower and upper class, e.g. "sm" or "ml".
  std::string boundary_id;
};

struct CrispModel {
  LabelSpace label_space = LabelSpace::standard(3);
  /// K-1 functions, highest boundary first.
  std::vector<CrispDecisionFunction> functions;
};

void validate(const CrispModel& model);

struct SgdConfig {
  double learning_rate = 0.1;
  int epochs = 200;
  int batch_size = 32;
  std::uint64_t rng_seed = 0;
};

struct BinarySample {
  FeatureVector x;
  double target = 0.0;
};

/// Per-boundary full-data mean loss after every epoch, highest boundary first.
struct CrispTrainingLog {
  std::vector<std::vector<double>> epoch_loss;
};

[[nodiscard]] double sigmoid_decision(const CrispDecisionFunction& f, const FeatureVector& x);

/// Summed cross-entropy of f over the samples.
[[nodiscard]] double crisp_loss(const CrispDecisionFunction& f, std::span<const BinarySample> data);

/// d crisp_loss / d weights.
[[nodiscard]] Eigen::Vector3d crisp_loss_gradient(const CrispDecisionFunction& f,
                                                  std::span<const BinarySample> data);

/// Binary targets for boundary j: 1 iff the size index exceeds j.
[[nodiscard]] std::vector<BinarySample> boundary_targets(std::span<const LabeledFeature> data,
                                                         std::size_t boundary);

/// Mini-batch SGD on every boundary. Deterministic for a fixed seed.
[[nodiscard]] CrispModel train_crisp(std::span<const LabeledFeature> data, const LabelSpace& space,
                                     const SgdConfig& cfg = {}, CrispTrainingLog* log = nullptr);

/// The rule chain over precomputed decision values, highest boundary first.
/// Strict comparison: a value of exactly 0.5 does not fire.
[[nodiscard]] SizeClass apply_rule_chain(std::span<const double> decisions);

[[nodiscard]] SizeClass classify_crisp(const CrispModel& model, const FeatureVector& x);

}  // namespace ckim
