#include "ckim/fuzzy.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <limits>

namespace ckim {

void validate(const GaussianMembership& g, double min_eigenvalue) {
  if (!g.mean.allFinite() || !g.covariance.allFinite()) {
    throw Error("membership parameters must be finite");
  }
  if (g.covariance(0, 1) != g.covariance(1, 0)) throw Error("membership covariance is not symmetric");
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(g.covariance, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < min_eigenvalue * (1.0 - 1e-9) ||
      !(g.covariance.determinant() > 0.0)) {
    throw Error("membership covariance is not positive definite");
  }
}

void validate(const FuzzyModel& model) {
  const std::size_t k = model.label_space.size();
  if (model.memberships.size() != k || model.centers.size() != k) {
    throw Error("fuzzy model needs one membership and one center per size class");
  }
  for (const auto& g : model.memberships) validate(g);
  for (std::size_t i = 0; i < k; ++i) {
    if (!std::isfinite(model.centers[i])) throw Error("fuzzy model has a non-finite center");
    if (i > 0 && !(model.centers[i] > model.centers[i - 1])) {
      throw Error("fuzzy model centers must be strictly increasing");
    }
  }
}

FuzzyModel fit_fuzzy(std::span<const LabeledFeature> data, const LabelSpace& space,
                     double regularization) {
  const std::size_t k = space.size();
  std::vector<std::size_t> count(k, 0);
  std::vector<Eigen::Vector2d> sum(k, Eigen::Vector2d::Zero());
  for (const auto& d : data) {
    if (d.size.index >= k) throw Error("training sample has an out-of-range size class");
    ++count[d.size.index];
    sum[d.size.index] += d.x.vec();
  }

  FuzzyModel model{space, {}, {}};
  model.memberships.resize(k);
  for (std::size_t c = 0; c < k; ++c) {
    if (count[c] < 3) {
      throw Error("size class '" + space.names()[c] + "' needs at least 3 samples, has " +
                  std::to_string(count[c]));
    }
    model.memberships[c].mean = sum[c] / static_cast<double>(count[c]);
    model.memberships[c].covariance.setZero();
  }
  for (const auto& d : data) {
    const Eigen::Vector2d r = d.x.vec() - model.memberships[d.size.index].mean;
    model.memberships[d.size.index].covariance += r * r.transpose();
  }
  for (std::size_t c = 0; c < k; ++c) {
    auto& cov = model.memberships[c].covariance;
    cov /= static_cast<double>(count[c]);
    cov(1, 0) = cov(0, 1);
    if (cov.isZero(0.0)) {
      throw Error("all samples of size class '" + space.names()[c] + "' are identical");
    }
    cov.diagonal().array() += regularization;
    model.centers.push_back(static_cast<double>(c));
  }
  return model;
}

double membership(const GaussianMembership& g, const FeatureVector& x) {
  return gaussian_density<double>(g.mean, g.covariance, x.vec());
}

double log_membership(const GaussianMembership& g, const FeatureVector& x) {
  return log_gaussian_density<double>(g.mean, g.covariance, x.vec());
}

double weighted_center(std::span<const double> degrees, std::span<const double> centers) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < degrees.size(); ++i) {
    num += degrees[i] * centers[i];
    den += degrees[i];
  }
  if (!(den > 0.0)) throw Error("total membership degree is zero");
  return num / den;
}

SizeClass nearest_center(double prediction, std::span<const double> centers,
                         std::span<const double> degrees) {
  std::size_t best = 0;
  double best_dist = std::abs(prediction - centers[0]);
  for (std::size_t i = 1; i < centers.size(); ++i) {
    const double dist = std::abs(prediction - centers[i]);
    if (dist < best_dist || (dist == best_dist && degrees[i] > degrees[best])) {
      best = i;
      best_dist = dist;
    }
  }
  return SizeClass{best};
}

FuzzyOutcome defuzzify(const FuzzyModel& model, const FeatureVector& x) {
  const std::size_t k = model.memberships.size();
  FuzzyOutcome out;
  out.degrees.resize(k);
  bool all_underflow = true;
  for (std::size_t i = 0; i < k; ++i) {
    out.degrees[i] = membership(model.memberships[i], x);
    if (out.degrees[i] >= kUnderflowThreshold) all_underflow = false;
  }
  if (!all_underflow) {
    out.prediction = weighted_center(out.degrees, model.centers);
    out.label = nearest_center(out.prediction, model.centers, out.degrees);
    return out;
  }

  // Every rule fired below the representable range: rescale by the largest
  // log-degree so the weights stay finite, and take the strongest rule.
  out.log_space = true;
  std::vector<double> logs(k);
  for (std::size_t i = 0; i < k; ++i) logs[i] = log_membership(model.memberships[i], x);
  const auto top = static_cast<std::size_t>(std::max_element(logs.begin(), logs.end()) - logs.begin());
  std::vector<double> scaled(k);
  for (std::size_t i = 0; i < k; ++i) scaled[i] = std::exp(logs[i] - logs[top]);
  out.prediction = weighted_center(scaled, model.centers);
  out.label = SizeClass{top};
  return out;
}

SizeClass classify_fuzzy(const FuzzyModel& model, const FeatureVector& x) {
  return defuzzify(model, x).label;
}

}  // namespace ckim
