#include "sdrmice/analysis.hpp"

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace sdrmice::analysis {

namespace {

constexpr double kFisherClamp = 1.0 - 1e-12;

double sample_mean(const Vector& v) { return v.mean(); }

double sample_cov(const Vector& a, const Vector& b) {
  const double ma = a.mean();
  const double mb = b.mean();
  return ((a.array() - ma) * (b.array() - mb)).sum() / static_cast<double>(a.size() - 1);
}

double fisher_z(double r) {
  return std::atanh(std::clamp(r, -kFisherClamp, kFisherClamp));
}

}  // namespace

std::string Estimand::label() const {
  const std::string a = "z" + std::to_string(col_a + 1);
  const std::string b = "z" + std::to_string(col_b + 1);
  switch (kind) {
    case EstimandKind::kMean: return "mean_" + a;
    case EstimandKind::kVariance: return "var_" + a;
    case EstimandKind::kCovariance: return "cov_" + a + "_" + b;
    case EstimandKind::kCorrelation: return "cor_" + a + "_" + b;
  }
  return "unknown";
}

EstimateResult estimate(const Matrix& data, const Estimand& estimand) {
  const Index n = data.rows();
  // Correlations need n > 3 for a finite transformed-scale standard error;
  // the moment estimands only need two rows.
  if (n < (estimand.kind == EstimandKind::kCorrelation ? 4 : 2))
    raise(ErrorKind::kDegenerateSample, "too few rows for the requested estimand");
  if ((estimand.kind == EstimandKind::kCovariance ||
       estimand.kind == EstimandKind::kCorrelation) &&
      (estimand.col_b < 0 || estimand.col_b == estimand.col_a))
    raise(ErrorKind::kInvalidArgument, "pair estimands need two distinct columns");
  const double dn = static_cast<double>(n);

  switch (estimand.kind) {
    case EstimandKind::kMean: {
      const Vector& col = data.col(estimand.col_a);
      const double var = sample_cov(col, col);
      return {sample_mean(col), std::sqrt(var / dn)};
    }
    case EstimandKind::kVariance: {
      const Vector& col = data.col(estimand.col_a);
      const double var = sample_cov(col, col);
      return {var, var * std::sqrt(2.0 / (dn - 1.0))};
    }
    case EstimandKind::kCovariance: {
      const Vector& a = data.col(estimand.col_a);
      const Vector& b = data.col(estimand.col_b);
      const double sab = sample_cov(a, b);
      const double saa = sample_cov(a, a);
      const double sbb = sample_cov(b, b);
      return {sab, std::sqrt((saa * sbb + sab * sab) / (dn - 1.0))};
    }
    case EstimandKind::kCorrelation: {
      const Vector& a = data.col(estimand.col_a);
      const Vector& b = data.col(estimand.col_b);
      const double sab = sample_cov(a, b);
      const double saa = sample_cov(a, a);
      const double sbb = sample_cov(b, b);
      const double r = (saa > 0.0 && sbb > 0.0) ? sab / std::sqrt(saa * sbb) : 0.0;
      return {r, 1.0 / std::sqrt(dn - 3.0)};
    }
  }
  raise(ErrorKind::kInvalidArgument, "unknown estimand kind");
}

PooledEstimate pool(const std::vector<EstimateResult>& estimates, PoolScale scale) {
  const std::size_t d = estimates.size();
  if (d == 0) raise(ErrorKind::kInvalidArgument, "no estimates to pool");

  std::vector<double> points(d);
  double ubar = 0.0;
  for (std::size_t m = 0; m < d; ++m) {
    points[m] = scale == PoolScale::kFisherZ ? fisher_z(estimates[m].point) : estimates[m].point;
    ubar += estimates[m].se * estimates[m].se;
  }
  ubar /= static_cast<double>(d);

  double qbar = 0.0;
  for (const double p : points) qbar += p;
  qbar /= static_cast<double>(d);

  double between = 0.0;
  if (d > 1) {
    for (const double p : points) between += (p - qbar) * (p - qbar);
    between /= static_cast<double>(d - 1);
  }

  const double inflation = 1.0 + 1.0 / static_cast<double>(d);
  const double total = ubar + inflation * between;

  double df = std::numeric_limits<double>::infinity();
  double quantile975;
  if (d > 1 && between > 0.0) {
    const double ratio = ubar / (inflation * between);
    df = static_cast<double>(d - 1) * (1.0 + ratio) * (1.0 + ratio);
    quantile975 = boost::math::quantile(boost::math::students_t_distribution<double>(df), 0.975);
  } else {
    quantile975 = boost::math::quantile(boost::math::normal_distribution<double>(), 0.975);
  }

  const double half = quantile975 * std::sqrt(total);
  PooledEstimate pooled;
  pooled.within_variance = ubar;
  pooled.between_variance = between;
  pooled.total_variance = total;
  pooled.df = df;
  if (scale == PoolScale::kFisherZ) {
    pooled.point = std::tanh(qbar);
    pooled.ci_lower = std::tanh(qbar - half);
    pooled.ci_upper = std::tanh(qbar + half);
  } else {
    pooled.point = qbar;
    pooled.ci_lower = qbar - half;
    pooled.ci_upper = qbar + half;
  }
  return pooled;
}

double prb(const std::vector<double>& pooled_points, double truth, bool* absolute_fallback) {
  if (pooled_points.empty()) raise(ErrorKind::kInvalidArgument, "no replications");
  double mean = 0.0;
  for (const double p : pooled_points) mean += p;
  mean /= static_cast<double>(pooled_points.size());
  if (absolute_fallback) *absolute_fallback = false;
  if (truth == 0.0) {
    if (absolute_fallback) *absolute_fallback = true;
    return std::abs(mean);
  }
  return std::abs((mean - truth) / truth) * 100.0;
}

double ciw(const std::vector<std::pair<double, double>>& bounds) {
  if (bounds.empty()) raise(ErrorKind::kInvalidArgument, "no replications");
  double total = 0.0;
  for (const auto& [lo, hi] : bounds) total += hi - lo;
  return total / static_cast<double>(bounds.size());
}

double cic(const std::vector<std::pair<double, double>>& bounds, double truth) {
  if (bounds.empty()) raise(ErrorKind::kInvalidArgument, "no replications");
  std::size_t covered = 0;
  for (const auto& [lo, hi] : bounds)
    if (lo <= truth && truth <= hi) ++covered;
  return static_cast<double>(covered) / static_cast<double>(bounds.size());
}

std::vector<Estimand> default_estimands() {
  std::vector<Estimand> out;
  for (int j = 0; j < 3; ++j) out.push_back({EstimandKind::kMean, j});
  for (int j = 0; j < 3; ++j) out.push_back({EstimandKind::kVariance, j});
  for (int a = 0; a < 3; ++a)
    for (int b = a + 1; b < 3; ++b) out.push_back({EstimandKind::kCovariance, a, b});
  for (int a = 0; a < 3; ++a)
    for (int b = a + 1; b < 3; ++b) out.push_back({EstimandKind::kCorrelation, a, b});
  return out;
}

}  // namespace sdrmice::analysis
