#pragma once

#include <string>
#include <utility>
#include <vector>

#include "sdrmice/types.hpp"

namespace sdrmice::analysis {

enum class EstimandKind { kMean, kVariance, kCovariance, kCorrelation };

struct Estimand {
  EstimandKind kind;
  int col_a;
  int col_b = -1;  // second column for covariance/correlation

  std::string label() const;
};

struct EstimateResult {
  double point;
  double se;  // for correlations: standard error on the Fisher-z scale
};

/// Rubin-pooled estimate. For correlations the pooling happens on the
/// Fisher-z scale (variance fields are on that scale) and point/CI are
/// back-transformed.
struct PooledEstimate {
  double point;
  double within_variance;
  double between_variance;
  double total_variance;
  double df;  // +inf when the between-imputation variance is zero
  double ci_lower;
  double ci_upper;
  double confidence = 0.95;
};

enum class PoolScale { kIdentity, kFisherZ };

/// Point estimate and analytic standard error on a complete data matrix.
/// Mean: sd/sqrt(N). Variance: s^2 * sqrt(2/(N-1)). Covariance: normal-theory
/// delta method. Correlation: point on the natural scale, SE = 1/sqrt(N-3)
/// on the Fisher-z scale. Throws DegenerateSample when N < 4.
EstimateResult estimate(const Matrix& data, const Estimand& estimand);

/// Rubin's rules. A single estimate is returned with its own normal-theory
/// interval. Use PoolScale::kFisherZ for correlations.
PooledEstimate pool(const std::vector<EstimateResult>& estimates,
                    PoolScale scale = PoolScale::kIdentity);

/// Absolute percent relative bias of the across-replication mean against the
/// truth. When the truth is zero the absolute bias is returned instead and
/// *absolute_fallback (if given) is set.
double prb(const std::vector<double>& pooled_points, double truth,
           bool* absolute_fallback = nullptr);

/// Average confidence interval width.
double ciw(const std::vector<std::pair<double, double>>& bounds);

/// Proportion of intervals containing the truth (boundary counts as covered).
double cic(const std::vector<std::pair<double, double>>& bounds, double truth);

/// Means, variances, covariances and correlations of the first three columns.
std::vector<Estimand> default_estimands();

}  // namespace sdrmice::analysis
