#pragma once

// Reference implementations used by the unit tests and the acceptance
// binary. They are written out longhand and share no code with the library.

#include "ckim/fuzzy.hpp"
#include "ckim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace oracle {

inline constexpr long double kPi = 3.14159265358979323846264338327950288L;

inline long double mahalanobis(const ckim::GaussianMembership& g, long double x0, long double x1) {
  const long double a = g.covariance(0, 0);
  const long double b = g.covariance(0, 1);
  const long double c = g.covariance(1, 1);
  const long double det = a * c - b * b;
  const long double d0 = x0 - g.mean(0);
  const long double d1 = x1 - g.mean(1);
  return (c * d0 * d0 - 2 * b * d0 * d1 + a * d1 * d1) / det;
}

inline long double sqrt_det(const ckim::GaussianMembership& g) {
  const long double a = g.covariance(0, 0);
  const long double b = g.covariance(0, 1);
  const long double c = g.covariance(1, 1);
  return std::sqrt(a * c - b * b);
}

/// Bivariate normal density via the explicit 2x2 inverse, in long double.
inline long double density(const ckim::GaussianMembership& g, long double x0, long double x1) {
  return std::exp(-0.5L * mahalanobis(g, x0, x1)) / (2.0L * kPi * sqrt_det(g));
}

inline long double log_density(const ckim::GaussianMembership& g, long double x0, long double x1) {
  return -0.5L * mahalanobis(g, x0, x1) - std::log(2.0L * kPi * sqrt_det(g));
}

/// Weighted average of centers, nearest-center label. When every degree is
/// below the underflow threshold, the class with the largest log-degree.
inline std::size_t fuzzy_label(const ckim::FuzzyModel& m, double x0, double x1) {
  const std::size_t k = m.memberships.size();
  std::vector<long double> deg(k);
  bool any = false;
  for (std::size_t i = 0; i < k; ++i) {
    deg[i] = density(m.memberships[i], x0, x1);
    any = any || deg[i] >= 1e-300L;
  }
  std::size_t best = 0;
  if (!any) {
    for (std::size_t i = 1; i < k; ++i) {
      if (log_density(m.memberships[i], x0, x1) > log_density(m.memberships[best], x0, x1)) best = i;
    }
    return best;
  }
  long double num = 0;
  long double den = 0;
  for (std::size_t i = 0; i < k; ++i) {
    num += deg[i] * m.centers[i];
    den += deg[i];
  }
  const long double pred = num / den;
  for (std::size_t i = 1; i < k; ++i) {
    if (std::abs(pred - m.centers[i]) < std::abs(pred - m.centers[best])) best = i;
  }
  return best;
}

/// AP from first principles: every true positive adds 1/num_truth recall at
/// the best precision reachable at or beyond its rank.
inline double average_precision(std::vector<ckim::RankedHit> hits, std::size_t num_truth) {
  std::stable_sort(hits.begin(), hits.end(), [](auto& a, auto& b) { return a.confidence > b.confidence; });
  double ap = 0.0;
  for (std::size_t i = 0; i < hits.size(); ++i) {
    if (!hits[i].true_positive) continue;
    double best = 0.0;
    for (std::size_t j = i; j < hits.size(); ++j) {
      const auto tp = std::count_if(hits.begin(), hits.begin() + static_cast<long>(j) + 1,
                                    [](auto& h) { return h.true_positive; });
      best = std::max(best, static_cast<double>(tp) / static_cast<double>(j + 1));
    }
    ap += best / static_cast<double>(num_truth);
  }
  return ap;
}

}  // namespace oracle
