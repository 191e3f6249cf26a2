#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "sdrmice/rng.hpp"
#include "sdrmice/types.hpp"

namespace sdrmice::dimred {

/// Per-column centering/scaling constants of the matrix a model was fit on.
struct StandardizationStats {
  Vector means;
  Vector sds;

  static StandardizationStats identity(Index p) {
    StandardizationStats s;
    s.means = Vector::Zero(p);
    s.sds = Vector::Ones(p);
    return s;
  }
};

enum class ModelKind { kPca, kSpcr, kPcovr, kPls };

/// Fitted dimensionality-reduction model. All component estimators share this
/// carrier so downstream prediction is uniform:
///   scores  T = standardized(X[:, active_set]) * weights
///   fitted  y = T * coefficients + outcome_mean
struct ComponentModel {
  ModelKind kind = ModelKind::kPca;
  Matrix weights;            // p_active x Q
  Matrix loadings;           // p_active x Q predictor loadings
  Vector outcome_loadings;   // Q, empty for pure PCA
  Vector coefficients;       // Q, empty for pure PCA
  double residual_variance = 0.0;
  int n_components = 0;
  StandardizationStats stats;
  double outcome_mean = 0.0;
  std::vector<int> active_set;  // retained predictor columns, original indices
  std::optional<double> alpha;               // PCovR mixing weight
  std::optional<double> selected_threshold;  // SPCR screening threshold

  /// Scores for raw predictor rows (full original width).
  Matrix scores(const Matrix& raw_rows) const;
  /// Predicted outcome values for raw predictor rows.
  Vector predict(const Matrix& raw_rows) const;
};

/// Center and scale every column to mean 0, sample variance 1.
/// Throws ConstantColumn if any column has zero variance.
std::pair<Matrix, StandardizationStats> standardize(const Matrix& x);

/// Apply previously computed statistics to new rows.
Matrix apply_standardization(const Matrix& x, const StandardizationStats& stats);

/// Principal components of a standardized matrix via eigendecomposition of the
/// cross-product matrix (SVD route when rows < columns). Weight columns are
/// ordered by descending eigenvalue and sign-fixed so the largest-magnitude
/// entry of each weight vector is positive.
ComponentModel fit_pca(const Matrix& x_std, int n_components);

/// PCA followed by regression of the centered outcome on the scores;
/// residual_variance = RSS / (N - Q).
ComponentModel fit_pcr(const Matrix& x_std, const Vector& y_centered, int n_components);

/// Columns whose absolute sample correlation with the outcome strictly
/// exceeds the threshold, original order preserved.
std::vector<int> screen_predictors(const Matrix& x_std, const Vector& y_centered,
                                   double threshold);

struct ThresholdSelection {
  double rho;
  std::vector<int> active_set;
};

/// K-fold cross-validated screening-threshold selection for supervised PCR.
/// Feasible grid values are those retaining at least Q columns; among them the
/// mean squared prediction error of the Q-component PCR decides, ties broken
/// toward the larger threshold. Folds are re-standardized on their training
/// part. Throws NoFeasibleThreshold when no grid value retains Q columns.
ThresholdSelection cv_select_threshold(const Matrix& x_std, const Vector& y_centered,
                                       int n_components, const std::vector<double>& grid,
                                       int folds, Rng& rng);

/// Maximum-likelihood mixing weight for principal covariates regression:
/// alpha = |X|^2 / (|X|^2 + |y|^2 * vx / vy) with vx the proportion of X
/// variance unexplained by a Q-component PCA and vy the proportion of y
/// variance unexplained by OLS of y on X (floored at 1e-12).
double alpha_ml(const Matrix& x_std, const Vector& y_centered, int n_components);

/// Principal covariates regression: orthonormal scores maximizing the
/// alpha-weighted, norm-scaled sum of predictor and outcome fits.
ComponentModel fit_pcovr(const Matrix& x_std, const Vector& y_centered, int n_components,
                         double alpha);

/// Partial least squares (single outcome): sequential weight vectors
/// proportional to the deflated cross-covariance with y. The stored weight
/// matrix is the rotation giving scores directly from the undeflated matrix;
/// residual_variance = RSS / (N - Q - 1).
ComponentModel fit_pls(const Matrix& x_std, const Vector& y_centered, int n_components);

}  // namespace sdrmice::dimred
