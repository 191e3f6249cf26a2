#include "sdrmice/imputers.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

namespace sdrmice::imp {

namespace {

struct SplitRows {
  std::vector<Index> observed;
  std::vector<Index> missing;
};

SplitRows split_rows(const MaskedColumn& target) {
  SplitRows split;
  for (std::size_t i = 0; i < target.missing.size(); ++i) {
    (target.missing[i] ? split.missing : split.observed).push_back(static_cast<Index>(i));
  }
  return split;
}

Matrix gather_rows(const Matrix& m, const std::vector<Index>& rows) {
  Matrix out(static_cast<Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = m.row(rows[i]);
  return out;
}

Vector gather(const Vector& v, const std::vector<Index>& rows) {
  Vector out(static_cast<Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) out(static_cast<Index>(i)) = v(rows[i]);
  return out;
}

std::vector<Index> draw_bootstrap_rows(const std::vector<Index>& observed, Rng& rng) {
  std::vector<Index> out(observed.size());
  for (std::size_t i = 0; i < observed.size(); ++i)
    out[i] = observed[rng.uniform_index(observed.size())];
  return out;
}

struct StandardizedBoot {
  Matrix x_std;                 // bootstrap rows, kept columns, standardized
  dimred::StandardizationStats stats;
  std::vector<int> kept;        // column indices into the caller's predictors
};

// Standardize the bootstrap predictor rows; columns that come out constant in
// the resample are dropped for this draw.
StandardizedBoot standardize_bootstrap(const Matrix& x_boot) {
  const Index n = x_boot.rows();
  const Index p = x_boot.cols();
  StandardizedBoot out;
  std::vector<double> means;
  std::vector<double> sds;
  std::vector<Vector> cols;
  for (Index j = 0; j < p; ++j) {
    const double mean = x_boot.col(j).mean();
    const double ss = (x_boot.col(j).array() - mean).square().sum();
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    if (sd <= 0.0) continue;
    out.kept.push_back(static_cast<int>(j));
    means.push_back(mean);
    sds.push_back(sd);
    cols.emplace_back((x_boot.col(j).array() - mean) / sd);
  }
  const Index kept_n = static_cast<Index>(out.kept.size());
  out.x_std.resize(n, kept_n);
  out.stats.means.resize(kept_n);
  out.stats.sds.resize(kept_n);
  for (Index j = 0; j < kept_n; ++j) {
    out.x_std.col(j) = cols[static_cast<std::size_t>(j)];
    out.stats.means(j) = means[static_cast<std::size_t>(j)];
    out.stats.sds(j) = sds[static_cast<std::size_t>(j)];
  }
  return out;
}

void require_component_capacity(int n_components, Index n_predictors) {
  // Component-based imputation requires strict dimension reduction; asking
  // for as many components as predictors is treated as infeasible.
  if (n_components >= n_predictors)
    raise(ErrorKind::kInfeasibleComponents,
          std::to_string(n_components) + " components exceed what " +
              std::to_string(n_predictors) + " predictors support");
}

void require_observed(int n_components, std::size_t n_obs) {
  if (static_cast<int>(n_obs) < n_components + 2)
    raise(ErrorKind::kTooFewObserved,
          std::to_string(n_obs) + " observed rows for " + std::to_string(n_components) +
              " components");
}

Vector draw_values(const dimred::ComponentModel& model, const Matrix& x_mis, Rng& rng) {
  Vector values = model.predict(x_mis);
  const double sigma = std::sqrt(std::max(0.0, model.residual_variance));
  for (Index i = 0; i < values.size(); ++i) values(i) += sigma * rng.normal();
  return values;
}

double pairwise_correlation(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t n = a.size();
  if (n < 2) return 0.0;
  double ma = 0.0;
  double mb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double saa = 0.0;
  double sbb = 0.0;
  double sab = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    saa += da * da;
    sbb += db * db;
    sab += da * db;
  }
  if (saa <= 0.0 || sbb <= 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

}  // namespace

std::vector<Index> MaskedColumn::observed_rows() const { return split_rows(*this).observed; }
std::vector<Index> MaskedColumn::missing_rows() const { return split_rows(*this).missing; }

ImputationDraw impute_pcr(const MaskedColumn& target, const Matrix& predictors,
                          int n_components, Rng& rng) {
  const SplitRows rows = split_rows(target);
  if (rows.missing.empty()) return {};
  require_observed(n_components, rows.observed.size());
  require_component_capacity(n_components, predictors.cols());

  const std::vector<Index> boot = draw_bootstrap_rows(rows.observed, rng);
  const Matrix x_boot = gather_rows(predictors, boot);
  const Vector y_boot = gather(target.values, boot);

  StandardizedBoot std_boot = standardize_bootstrap(x_boot);
  if (static_cast<int>(std_boot.kept.size()) < n_components)
    raise(ErrorKind::kInfeasibleComponents, "resample left too few usable predictors");

  const double y_mean = y_boot.mean();
  dimred::ComponentModel model =
      dimred::fit_pcr(std_boot.x_std, Vector(y_boot.array() - y_mean), n_components);
  model.kind = dimred::ModelKind::kPca;
  model.stats = std::move(std_boot.stats);
  model.outcome_mean = y_mean;
  model.active_set = std::move(std_boot.kept);

  ImputationDraw draw;
  draw.values = draw_values(model, gather_rows(predictors, rows.missing), rng);
  return draw;
}

ImputationDraw impute_spcr(const MaskedColumn& target, const Matrix& predictors,
                           int n_components, const std::vector<double>& threshold_grid,
                           int cv_folds, Rng& rng) {
  const SplitRows rows = split_rows(target);
  if (rows.missing.empty()) return {};
  require_observed(n_components, rows.observed.size());
  if (n_components > predictors.cols())
    raise(ErrorKind::kInfeasibleComponents, "more components than predictors");

  const std::vector<Index> boot = draw_bootstrap_rows(rows.observed, rng);
  const Matrix x_boot = gather_rows(predictors, boot);
  const Vector y_boot = gather(target.values, boot);

  const StandardizedBoot std_boot = standardize_bootstrap(x_boot);
  const double y_mean = y_boot.mean();
  const Vector y_centered = y_boot.array() - y_mean;

  const dimred::ThresholdSelection selection = dimred::cv_select_threshold(
      std_boot.x_std, y_centered, n_components, threshold_grid, cv_folds, rng);

  Matrix x_screened(std_boot.x_std.rows(), static_cast<Index>(selection.active_set.size()));
  dimred::StandardizationStats stats;
  stats.means.resize(x_screened.cols());
  stats.sds.resize(x_screened.cols());
  std::vector<int> active;
  for (std::size_t j = 0; j < selection.active_set.size(); ++j) {
    const int local = selection.active_set[j];
    x_screened.col(static_cast<Index>(j)) = std_boot.x_std.col(local);
    stats.means(static_cast<Index>(j)) = std_boot.stats.means(local);
    stats.sds(static_cast<Index>(j)) = std_boot.stats.sds(local);
    active.push_back(std_boot.kept[static_cast<std::size_t>(local)]);
  }

  dimred::ComponentModel model = dimred::fit_pcr(x_screened, y_centered, n_components);
  model.kind = dimred::ModelKind::kSpcr;
  model.selected_threshold = selection.rho;
  model.stats = std::move(stats);
  model.outcome_mean = y_mean;
  model.active_set = active;

  ImputationDraw draw;
  draw.values = draw_values(model, gather_rows(predictors, rows.missing), rng);
  draw.diagnostics.rho_s = selection.rho;
  draw.diagnostics.active_set_size = static_cast<int>(active.size());
  draw.diagnostics.active_set = std::move(active);
  return draw;
}

ImputationDraw impute_pcovr(const MaskedColumn& target, const Matrix& predictors,
                            int n_components, Rng& rng) {
  const SplitRows rows = split_rows(target);
  if (rows.missing.empty()) return {};
  require_observed(n_components, rows.observed.size());
  require_component_capacity(n_components, predictors.cols());

  const std::vector<Index> boot = draw_bootstrap_rows(rows.observed, rng);
  const Matrix x_boot = gather_rows(predictors, boot);
  const Vector y_boot = gather(target.values, boot);

  StandardizedBoot std_boot = standardize_bootstrap(x_boot);
  if (static_cast<int>(std_boot.kept.size()) < n_components)
    raise(ErrorKind::kInfeasibleComponents, "resample left too few usable predictors");

  const double y_mean = y_boot.mean();
  const Vector y_centered = y_boot.array() - y_mean;
  const double alpha = dimred::alpha_ml(std_boot.x_std, y_centered, n_components);

  dimred::ComponentModel model = dimred::fit_pcovr(std_boot.x_std, y_centered, n_components, alpha);
  model.stats = std::move(std_boot.stats);
  model.outcome_mean = y_mean;
  model.active_set = std::move(std_boot.kept);

  ImputationDraw draw;
  draw.values = draw_values(model, gather_rows(predictors, rows.missing), rng);
  draw.diagnostics.alpha = alpha;
  return draw;
}

ImputationDraw impute_plsr(const MaskedColumn& target, const Matrix& predictors,
                           int n_components, Rng& rng) {
  const SplitRows rows = split_rows(target);
  if (rows.missing.empty()) return {};
  require_observed(n_components, rows.observed.size());
  require_component_capacity(n_components, predictors.cols());

  const std::vector<Index> boot = draw_bootstrap_rows(rows.observed, rng);
  const Matrix x_boot = gather_rows(predictors, boot);
  const Vector y_boot = gather(target.values, boot);

  StandardizedBoot std_boot = standardize_bootstrap(x_boot);
  if (static_cast<int>(std_boot.kept.size()) < n_components)
    raise(ErrorKind::kInfeasibleComponents, "resample left too few usable predictors");

  const double y_mean = y_boot.mean();
  dimred::ComponentModel model =
      dimred::fit_pls(std_boot.x_std, Vector(y_boot.array() - y_mean), n_components);
  model.stats = std::move(std_boot.stats);
  model.outcome_mean = y_mean;
  model.active_set = std::move(std_boot.kept);

  ImputationDraw draw;
  draw.diagnostics.first_weight = model.weights.col(0);
  draw.values = draw_values(model, gather_rows(predictors, rows.missing), rng);
  return draw;
}

ImputationDraw impute_normlinear(const MaskedColumn& target, const Matrix& predictors_subset,
                                 Rng& rng) {
  const SplitRows rows = split_rows(target);
  if (rows.missing.empty()) return {};
  const Index p = predictors_subset.cols();
  const Index n_obs = static_cast<Index>(rows.observed.size());
  if (n_obs <= p + 1)
    raise(ErrorKind::kTooFewObserved,
          std::to_string(n_obs) + " observed rows for " + std::to_string(p) + " predictors");

  constexpr int kMaxAttempts = 25;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    const std::vector<Index> boot = draw_bootstrap_rows(rows.observed, rng);
    Matrix design(n_obs, p + 1);
    design.col(0).setOnes();
    design.rightCols(p) = gather_rows(predictors_subset, boot);
    const Vector y_boot = gather(target.values, boot);

    Eigen::ColPivHouseholderQR<Matrix> qr(design);
    if (qr.rank() < p + 1) continue;
    const Vector beta = qr.solve(y_boot);
    const double rss = (y_boot - design * beta).squaredNorm();
    const double sigma2 = rss / static_cast<double>(n_obs - p - 1);
    const double sigma = std::sqrt(std::max(0.0, sigma2));

    Matrix design_mis(static_cast<Index>(rows.missing.size()), p + 1);
    design_mis.col(0).setOnes();
    design_mis.rightCols(p) = gather_rows(predictors_subset, rows.missing);

    ImputationDraw draw;
    draw.values = design_mis * beta;
    for (Index i = 0; i < draw.values.size(); ++i) draw.values(i) += sigma * rng.normal();
    return draw;
  }
  raise(ErrorKind::kSingularDesign,
        "bootstrap design rank deficient after " + std::to_string(kMaxAttempts) + " attempts");
}

std::vector<int> quickpred_select(const DataMatrix& data, int target_index, double threshold) {
  const Index n = data.n_rows();
  const Index t = target_index;
  std::vector<int> selected;
  for (Index k = 0; k < data.n_cols(); ++k) {
    if (k == t) continue;
    std::vector<double> xs;
    std::vector<double> ys;
    std::vector<double> xk;
    std::vector<double> ind;
    for (Index i = 0; i < n; ++i) {
      if (!data.missing(i, k)) {
        xk.push_back(data.values(i, k));
        ind.push_back(data.missing(i, t) ? 1.0 : 0.0);
        if (!data.missing(i, t)) {
          xs.push_back(data.values(i, k));
          ys.push_back(data.values(i, t));
        }
      }
    }
    const double r_value = pairwise_correlation(xs, ys);
    const double r_indicator = pairwise_correlation(xk, ind);
    if (std::abs(r_value) > threshold || std::abs(r_indicator) > threshold)
      selected.push_back(static_cast<int>(k));
  }
  return selected;
}

}  // namespace sdrmice::imp
