#pragma once

#include <filesystem>

#include "sdrmice/rng.hpp"
#include "sdrmice/types.hpp"

namespace sdrmice::datagen {

/// Confirmatory-factor-analysis generator settings: L latent variables with a
/// fixed number of items each, simple loading structure, and a latent
/// correlation matrix where the first two factors correlate at corr_12 and
/// every other pair at corr_other.
struct FactorSpec {
  int n_rows = 1000;
  int n_latent = 2;
  int items_per_latent = 3;
  double loading = 0.85;
  double corr_12 = 0.8;
  double corr_other = 0.1;
  double target_mean = 5.0;
  double target_var = 6.5;

  int n_items() const { return n_latent * items_per_latent; }
};

/// Latent correlation matrix; throws NotPositiveDefinite if the implied
/// matrix has a non-positive eigenvalue.
Matrix build_psi(const FactorSpec& spec);

/// Fully observed item matrix: latent scores times loadings plus uncorrelated
/// measurement error with variance 1 - loading^2, then each column rescaled
/// exactly to the target mean and variance. Labels are z1..zP.
DataMatrix generate(const FactorSpec& spec, Rng& rng);

/// Comma-delimited export with a header row of column labels.
void export_delimited(const std::filesystem::path& path, const DataMatrix& data);

}  // namespace sdrmice::datagen
