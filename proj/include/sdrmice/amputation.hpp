#pragma once

#include <vector>

#include "sdrmice/rng.hpp"
#include "sdrmice/types.hpp"

namespace sdrmice::ampute {

enum class Mechanism { kMcar, kMar };

/// Where in the score distribution MAR missingness concentrates.
enum class MarLocation { kRight, kLeft, kTails };

struct MissingnessSpec {
  Mechanism mechanism = Mechanism::kMar;
  double pm = 0.25;                      // target missingness proportion
  std::vector<int> targets = {0, 1, 2};
  std::vector<int> predictors = {3, 4, 5};
  std::vector<MarLocation> locations = {MarLocation::kRight, MarLocation::kLeft,
                                        MarLocation::kTails};
};

/// Mask each target cell independently with probability pm.
DataMatrix ampute_mcar(const DataMatrix& data, const MissingnessSpec& spec, Rng& rng);

/// Intercept b0 such that mean(logistic(b0 + eta)) equals pm within 1e-6,
/// found by bisection with an expanding bracket.
double calibrate_intercept(const Vector& linear_predictor, double pm);

/// Logistic missingness driven by the sum of the predictor columns, with a
/// per-target location transform (right: +s, left: -s, tails: |s - median|),
/// standardized to unit variance and intercept-calibrated to pm.
DataMatrix ampute_mar(const DataMatrix& data, const MissingnessSpec& spec, Rng& rng);

DataMatrix ampute(const DataMatrix& data, const MissingnessSpec& spec, Rng& rng);

const char* mechanism_label(Mechanism mech);

}  // namespace sdrmice::ampute
