#include "sdrmice/amputation.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace sdrmice::ampute {

namespace {

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double expected_proportion(double intercept, const Vector& eta) {
  double total = 0.0;
  for (Index i = 0; i < eta.size(); ++i) total += logistic(intercept + eta(i));
  return total / static_cast<double>(eta.size());
}

double sample_median(Vector v) {
  std::sort(v.data(), v.data() + v.size());
  const Index n = v.size();
  return (n % 2 == 1) ? v(n / 2) : 0.5 * (v(n / 2 - 1) + v(n / 2));
}

void validate_common(const DataMatrix& data, const MissingnessSpec& spec) {
  if (spec.pm < 0.0 || spec.pm >= 1.0)
    raise(ErrorKind::kInvalidArgument, "missingness proportion outside [0, 1)");
  for (const int t : spec.targets)
    if (t < 0 || t >= data.n_cols()) raise(ErrorKind::kInvalidArgument, "target column out of range");
}

}  // namespace

const char* mechanism_label(Mechanism mech) {
  return mech == Mechanism::kMcar ? "MCAR" : "MAR";
}

DataMatrix ampute_mcar(const DataMatrix& data, const MissingnessSpec& spec, Rng& rng) {
  validate_common(data, spec);
  DataMatrix out = data;
  for (const int t : spec.targets)
    for (Index i = 0; i < out.n_rows(); ++i)
      if (rng.bernoulli(spec.pm)) out.missing(i, t) = true;
  return out;
}

double calibrate_intercept(const Vector& linear_predictor, double pm) {
  if (pm <= 0.0 || pm >= 1.0)
    raise(ErrorKind::kInvalidArgument, "target proportion outside (0, 1)");
  double lo = -20.0;
  double hi = 20.0;
  // The expected proportion is strictly increasing in the intercept; expand
  // the bracket until it straddles pm, then bisect.
  while (expected_proportion(lo, linear_predictor) > pm && lo > -1e6) lo *= 2.0;
  while (expected_proportion(hi, linear_predictor) < pm && hi < 1e6) hi *= 2.0;
  double mid = 0.5 * (lo + hi);
  for (int iter = 0; iter < 200; ++iter) {
    mid = 0.5 * (lo + hi);
    const double achieved = expected_proportion(mid, linear_predictor);
    if (std::abs(achieved - pm) < 1e-9) break;
    (achieved < pm ? lo : hi) = mid;
  }
  return mid;
}

DataMatrix ampute_mar(const DataMatrix& data, const MissingnessSpec& spec, Rng& rng) {
  validate_common(data, spec);
  if (spec.locations.size() != spec.targets.size())
    raise(ErrorKind::kInvalidArgument, "one location per target required");
  for (const int p : spec.predictors) {
    if (p < 0 || p >= data.n_cols()) raise(ErrorKind::kInvalidArgument, "predictor column out of range");
    if (data.any_missing(p)) raise(ErrorKind::kInvalidArgument, "missingness predictors must be fully observed");
    for (const int t : spec.targets)
      if (t == p) raise(ErrorKind::kInvalidArgument, "targets and predictors overlap");
  }
  if (spec.pm == 0.0) return data;

  const Index n = data.n_rows();
  Vector score = Vector::Zero(n);
  for (const int p : spec.predictors) score += data.values.col(p);

  DataMatrix out = data;
  for (std::size_t k = 0; k < spec.targets.size(); ++k) {
    Vector u(n);
    switch (spec.locations[k]) {
      case MarLocation::kRight: u = score; break;
      case MarLocation::kLeft: u = -score; break;
      case MarLocation::kTails: {
        const double med = sample_median(score);
        u = (score.array() - med).abs();
        break;
      }
    }
    const double mean = u.mean();
    const double sd = std::sqrt((u.array() - mean).square().sum() / static_cast<double>(n - 1));
    if (sd <= 0.0) raise(ErrorKind::kInvalidArgument, "degenerate missingness score");
    const Vector eta = (u.array() - mean) / sd;

    const double intercept = calibrate_intercept(eta, spec.pm);
    const int t = spec.targets[k];
    for (Index i = 0; i < n; ++i)
      if (rng.bernoulli(logistic(intercept + eta(i)))) out.missing(i, t) = true;
  }
  return out;
}

DataMatrix ampute(const DataMatrix& data, const MissingnessSpec& spec, Rng& rng) {
  return spec.mechanism == Mechanism::kMcar ? ampute_mcar(data, spec, rng)
                                            : ampute_mar(data, spec, rng);
}

}  // namespace sdrmice::ampute
