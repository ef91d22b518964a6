#pragma once

// Fuzzy-rule size inference. Each size class k owns one rule "x matches M_k,
// label is k with degree M_k(x)", where M_k is a bivariate Gaussian density
// fitted by maximum likelihood. Rule outputs are merged by the weighted
// average of consequent centers
//
//   prediction = sum_k M_k(x) y_k / sum_k M_k(x)
//
// and the label is the class whose center is nearest the prediction.

#include "ckim/core.hpp"

#include <Eigen/Core>
#include <Eigen/LU>

#include <cmath>
#include <span>
#include <vector>

namespace ckim {

inline constexpr double kCovarianceRegularization = 1e-8;
inline constexpr double kUnderflowThreshold = 1e-300;

/// N(x | mean, cov) with the 1 / (2 pi |cov|^(1/2)) normalizer.
template <typename Scalar>
Scalar gaussian_density(const Eigen::Matrix<Scalar, 2, 1>& mean,
                        const Eigen::Matrix<Scalar, 2, 2>& cov,
                        const Eigen::Matrix<Scalar, 2, 1>& x) {
  using std::exp;
  using std::sqrt;
  const Eigen::Matrix<Scalar, 2, 1> d = x - mean;
  const Scalar maha = d.dot(cov.inverse() * d);
  const Scalar two_pi = Scalar(2) * Scalar(3.141592653589793238462643383279502884L);
  return exp(Scalar(-0.5) * maha) / (two_pi * sqrt(cov.determinant()));
}

/// log N(x | mean, cov); finite wherever the density underflows.
template <typename Scalar>
Scalar log_gaussian_density(const Eigen::Matrix<Scalar, 2, 1>& mean,
                            const Eigen::Matrix<Scalar, 2, 2>& cov,
                            const Eigen::Matrix<Scalar, 2, 1>& x) {
  using std::log;
  const Eigen::Matrix<Scalar, 2, 1> d = x - mean;
  const Scalar maha = d.dot(cov.inverse() * d);
  const Scalar two_pi = Scalar(2) * Scalar(3.141592653589793238462643383279502884L);
  return Scalar(-0.5) * maha - log(two_pi) - Scalar(0.5) * log(cov.determinant());
}

struct GaussianMembership {
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  Eigen::Matrix2d covariance = Eigen::Matrix2d::Identity();
};

/// Throws unless the covariance is symmetric with eigenvalues >= min_eigenvalue.
void validate(const GaussianMembership& g, double min_eigenvalue = kCovarianceRegularization);

struct FuzzyModel {
  LabelSpace label_space = LabelSpace::standard(3);
  /// One per class, smallest first.
  std::vector<GaussianMembership> memberships;
  /// Consequent centers, strictly increasing.
  std::vector<double> centers;
};

void validate(const FuzzyModel& model);

struct FuzzyOutcome {
  double prediction = 0.0;
  SizeClass label;
  std::vector<double> degrees;
  /// Set when every degree underflowed and the log-space path decided.
  bool log_space = false;
};

/// Per-class sample mean and MLE covariance (divisor n) plus
/// regularization * I. Centers are 0, 1, ..., K-1.
[[nodiscard]] FuzzyModel fit_fuzzy(std::span<const LabeledFeature> data, const LabelSpace& space,
                                   double regularization = kCovarianceRegularization);

[[nodiscard]] double membership(const GaussianMembership& g, const FeatureVector& x);
[[nodiscard]] double log_membership(const GaussianMembership& g, const FeatureVector& x);

/// Weighted average of centers. Requires a positive total degree.
[[nodiscard]] double weighted_center(std::span<const double> degrees, std::span<const double> centers);

/// Nearest center to the prediction. Equal distances go to the larger degree,
/// then to the smaller index.
[[nodiscard]] SizeClass nearest_center(double prediction, std::span<const double> centers,
                                       std::span<const double> degrees);

[[nodiscard]] FuzzyOutcome defuzzify(const FuzzyModel& model, const FeatureVector& x);

[[nodiscard]] SizeClass classify_fuzzy(const FuzzyModel& model, const FeatureVector& x);

}  // namespace ckim
