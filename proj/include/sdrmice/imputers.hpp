#pragma once

#include <optional>
#include <vector>

#include "sdrmice/dimred.hpp"
#include "sdrmice/rng.hpp"
#include "sdrmice/types.hpp"

namespace sdrmice::imp {

enum class Method { kPcr, kSpcr, kPcovr, kPlsr, kAll, kQp, kAm };

/// Configuration of one univariate imputation method. Method-specific fields
/// are read only by the method that needs them.
struct ImputerSpec {
  Method method = Method::kPcr;
  int n_components = 1;                 // component methods
  std::vector<double> threshold_grid;   // SPCR screening grid
  int cv_folds = 5;                     // SPCR
  double qp_threshold = 0.1;            // QP predictor selection
  std::vector<int> am_columns;          // AM predictors / QP fallback
};

/// Method-specific tuning values recorded per draw.
struct DrawDiagnostics {
  std::optional<double> rho_s;          // SPCR selected threshold
  std::optional<double> alpha;          // PCovR mixing weight
  std::optional<int> active_set_size;   // SPCR retained predictors
  std::vector<int> active_set;          // SPCR retained predictor indices
  Vector first_weight;                  // PLS first weight vector
};

/// Values for the missing rows of the target, in mask order.
struct ImputationDraw {
  Vector values;
  DrawDiagnostics diagnostics;
};

/// One partially observed column: values plus missingness mask.
struct MaskedColumn {
  Vector values;
  std::vector<bool> missing;

  std::vector<Index> observed_rows() const;
  std::vector<Index> missing_rows() const;
};

/// Bootstrap principal-component-regression imputation: resample observed
/// rows, standardize, extract components, regress, predict the missing rows
/// and add residual noise.
ImputationDraw impute_pcr(const MaskedColumn& target, const Matrix& predictors,
                          int n_components, Rng& rng);

/// Supervised variant: correlation screening with cross-validated threshold
/// selection before the component step.
ImputationDraw impute_spcr(const MaskedColumn& target, const Matrix& predictors,
                           int n_components, const std::vector<double>& threshold_grid,
                           int cv_folds, Rng& rng);

/// Principal-covariates variant with the maximum-likelihood mixing weight.
ImputationDraw impute_pcovr(const MaskedColumn& target, const Matrix& predictors,
                            int n_components, Rng& rng);

/// Partial-least-squares variant.
ImputationDraw impute_plsr(const MaskedColumn& target, const Matrix& predictors,
                           int n_components, Rng& rng);

/// Bootstrap normal-linear imputation on an explicit predictor subset
/// (intercept always included; the subset may be empty).
ImputationDraw impute_normlinear(const MaskedColumn& target, const Matrix& predictors_subset,
                                 Rng& rng);

/// Correlation-threshold predictor selection on incomplete data: keeps columns
/// whose pairwise-complete correlation with the target, or with the target's
/// missingness indicator, exceeds the threshold in absolute value.
std::vector<int> quickpred_select(const DataMatrix& data, int target_index,
                                  double threshold = 0.1);

}  // namespace sdrmice::imp
