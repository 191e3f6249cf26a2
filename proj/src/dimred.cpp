#include "sdrmice/dimred.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace sdrmice::dimred {

namespace {

constexpr double kRelRankTol = 1e-12;

// Flip each column so its largest-magnitude entry is positive.
void fix_column_signs(Matrix& w, std::vector<double>* flips = nullptr) {
  for (Index j = 0; j < w.cols(); ++j) {
    Index imax = 0;
    w.col(j).cwiseAbs().maxCoeff(&imax);
    const double flip = w(imax, j) < 0.0 ? -1.0 : 1.0;
    if (flip < 0.0) w.col(j) *= -1.0;
    if (flips) flips->push_back(flip);
  }
}

std::vector<int> full_active_set(Index p) {
  std::vector<int> set(static_cast<std::size_t>(p));
  std::iota(set.begin(), set.end(), 0);
  return set;
}

// Eigenvalues (descending) and eigenvectors of the cross-product matrix,
// via the SVD when there are fewer rows than columns.
void cross_product_eigen(const Matrix& x, Vector& values, Matrix& vectors) {
  const Index n = x.rows();
  const Index p = x.cols();
  if (n >= p) {
    const Matrix cross = x.transpose() * x;
    Eigen::SelfAdjointEigenSolver<Matrix> solver(cross);
    if (solver.info() != Eigen::Success)
      raise(ErrorKind::kRankDeficient, "eigendecomposition failed");
    values = solver.eigenvalues().reverse();
    vectors = solver.eigenvectors().rowwise().reverse();
  } else {
    Eigen::BDCSVD<Matrix> svd(x, Eigen::ComputeThinV);
    const Index r = svd.singularValues().size();
    values = Vector::Zero(p);
    values.head(r) = svd.singularValues().array().square();
    vectors = Matrix::Zero(p, p);
    vectors.leftCols(r) = svd.matrixV();
  }
  values = values.cwiseMax(0.0);
}

Vector solve_score_regression(const Matrix& scores, const Vector& y) {
  const Matrix gram = scores.transpose() * scores;
  return gram.ldlt().solve(scores.transpose() * y);
}

double cv_candidate_error(const Matrix& x, const Vector& y, int q,
                          const std::vector<int>& active,
                          const std::vector<int>& fold_of, int folds) {
  const Index n = x.rows();
  Matrix x_active(n, static_cast<Index>(active.size()));
  for (std::size_t j = 0; j < active.size(); ++j) x_active.col(static_cast<Index>(j)) = x.col(active[j]);

  double total_sq = 0.0;
  for (int k = 0; k < folds; ++k) {
    std::vector<Index> train;
    std::vector<Index> val;
    for (Index i = 0; i < n; ++i) (fold_of[static_cast<std::size_t>(i)] == k ? val : train).push_back(i);
    if (val.empty() || static_cast<int>(train.size()) <= q + 1) return std::numeric_limits<double>::infinity();

    Matrix x_tr(static_cast<Index>(train.size()), x_active.cols());
    Vector y_tr(static_cast<Index>(train.size()));
    for (std::size_t i = 0; i < train.size(); ++i) {
      x_tr.row(static_cast<Index>(i)) = x_active.row(train[i]);
      y_tr(static_cast<Index>(i)) = y(train[i]);
    }
    try {
      auto [x_tr_std, stats] = standardize(x_tr);
      const double y_mean = y_tr.mean();
      ComponentModel model = fit_pcr(x_tr_std, Vector(y_tr.array() - y_mean), q);
      model.stats = stats;
      model.outcome_mean = y_mean;
      Matrix x_val(static_cast<Index>(val.size()), x_active.cols());
      for (std::size_t i = 0; i < val.size(); ++i) x_val.row(static_cast<Index>(i)) = x_active.row(val[i]);
      const Vector pred = model.predict(x_val);
      for (std::size_t i = 0; i < val.size(); ++i) {
        const double e = y(val[i]) - pred(static_cast<Index>(i));
        total_sq += e * e;
      }
    } catch (const Error&) {
      return std::numeric_limits<double>::infinity();
    }
  }
  return total_sq / static_cast<double>(n);
}

}  // namespace

Matrix ComponentModel::scores(const Matrix& raw_rows) const {
  Matrix sub(raw_rows.rows(), static_cast<Index>(active_set.size()));
  for (std::size_t j = 0; j < active_set.size(); ++j)
    sub.col(static_cast<Index>(j)) = raw_rows.col(active_set[j]);
  for (Index j = 0; j < sub.cols(); ++j)
    sub.col(j) = (sub.col(j).array() - stats.means(j)) / stats.sds(j);
  return sub * weights;
}

Vector ComponentModel::predict(const Matrix& raw_rows) const {
  return (scores(raw_rows) * coefficients).array() + outcome_mean;
}

std::pair<Matrix, StandardizationStats> standardize(const Matrix& x) {
  const Index n = x.rows();
  const Index p = x.cols();
  if (n < 2) raise(ErrorKind::kInvalidArgument, "standardize needs at least 2 rows");
  StandardizationStats stats;
  stats.means.resize(p);
  stats.sds.resize(p);
  Matrix out(n, p);
  for (Index j = 0; j < p; ++j) {
    const double mean = x.col(j).mean();
    const double ss = (x.col(j).array() - mean).square().sum();
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    if (sd <= 0.0)
      raise(ErrorKind::kConstantColumn, "column " + std::to_string(j) + " is constant");
    stats.means(j) = mean;
    stats.sds(j) = sd;
    out.col(j) = (x.col(j).array() - mean) / sd;
  }
  return {std::move(out), std::move(stats)};
}

Matrix apply_standardization(const Matrix& x, const StandardizationStats& stats) {
  Matrix out(x.rows(), x.cols());
  for (Index j = 0; j < x.cols(); ++j)
    out.col(j) = (x.col(j).array() - stats.means(j)) / stats.sds(j);
  return out;
}

ComponentModel fit_pca(const Matrix& x_std, int n_components) {
  const Index n = x_std.rows();
  const Index p = x_std.cols();
  if (n_components < 1 || n_components > std::min<Index>(n - 1, p))
    raise(ErrorKind::kInvalidArgument,
          "component count " + std::to_string(n_components) + " outside [1, min(N-1, P)]");

  Vector values;
  Matrix vectors;
  cross_product_eigen(x_std, values, vectors);
  const double tol = values(0) * kRelRankTol;
  Index positive = 0;
  for (Index i = 0; i < values.size(); ++i)
    if (values(i) > tol) ++positive;
  if (positive < n_components)
    raise(ErrorKind::kRankDeficient,
          "only " + std::to_string(positive) + " positive eigenvalues for " +
              std::to_string(n_components) + " components");

  ComponentModel model;
  model.kind = ModelKind::kPca;
  model.n_components = n_components;
  model.weights = vectors.leftCols(n_components);
  fix_column_signs(model.weights);
  model.loadings = model.weights;
  model.stats = StandardizationStats::identity(p);
  model.active_set = full_active_set(p);
  return model;
}

ComponentModel fit_pcr(const Matrix& x_std, const Vector& y_centered, int n_components) {
  const Index n = x_std.rows();
  if (y_centered.size() != n)
    raise(ErrorKind::kInvalidArgument, "outcome length does not match row count");
  if (n <= n_components)
    raise(ErrorKind::kDegenerateDof, "no residual degrees of freedom");

  ComponentModel model = fit_pca(x_std, n_components);
  const Matrix scores = x_std * model.weights;
  model.coefficients = solve_score_regression(scores, y_centered);
  model.outcome_loadings = model.coefficients;
  const double rss = (y_centered - scores * model.coefficients).squaredNorm();
  model.residual_variance = rss / static_cast<double>(n - n_components);
  return model;
}

std::vector<int> screen_predictors(const Matrix& x_std, const Vector& y_centered,
                                   double threshold) {
  if (threshold < 0.0 || threshold > 1.0)
    raise(ErrorKind::kInvalidArgument, "threshold outside [0, 1]");
  const double y_mean = y_centered.mean();
  const Vector yc = y_centered.array() - y_mean;
  const double syy = yc.squaredNorm();
  std::vector<int> active;
  for (Index j = 0; j < x_std.cols(); ++j) {
    const double x_mean = x_std.col(j).mean();
    const Vector xc = x_std.col(j).array() - x_mean;
    const double sxx = xc.squaredNorm();
    const double r = (sxx > 0.0 && syy > 0.0) ? xc.dot(yc) / std::sqrt(sxx * syy) : 0.0;
    if (std::abs(r) > threshold) active.push_back(static_cast<int>(j));
  }
  return active;
}

ThresholdSelection cv_select_threshold(const Matrix& x_std, const Vector& y_centered,
                                       int n_components, const std::vector<double>& grid,
                                       int folds, Rng& rng) {
  if (grid.empty()) raise(ErrorKind::kInvalidArgument, "empty threshold grid");
  if (folds < 2) raise(ErrorKind::kInvalidArgument, "cross-validation needs at least 2 folds");
  const Index n = x_std.rows();
  if (folds > n) raise(ErrorKind::kInvalidArgument, "more folds than rows");

  // Distinct feasible active sets, keyed by content; equal sets share the CV
  // error exactly, so only the largest threshold per set can win the tie-break.
  std::map<std::vector<int>, double> set_to_rho;
  for (const double rho : grid) {
    std::vector<int> active = screen_predictors(x_std, y_centered, rho);
    if (static_cast<int>(active.size()) < n_components) continue;
    auto [it, inserted] = set_to_rho.try_emplace(std::move(active), rho);
    if (!inserted) it->second = std::max(it->second, rho);
  }
  if (set_to_rho.empty())
    raise(ErrorKind::kNoFeasibleThreshold,
          "no grid threshold retains " + std::to_string(n_components) + " columns");

  if (set_to_rho.size() == 1) {
    const auto& [set, rho] = *set_to_rho.begin();
    return {rho, set};
  }

  const std::vector<std::size_t> order = rng.shuffled_indices(static_cast<std::size_t>(n));
  std::vector<int> fold_of(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < order.size(); ++i)
    fold_of[order[i]] = static_cast<int>(i % static_cast<std::size_t>(folds));

  const std::vector<int>* best_set = nullptr;
  double best_rho = -1.0;
  double best_err = std::numeric_limits<double>::infinity();
  for (const auto& [set, rho] : set_to_rho) {
    const double err = cv_candidate_error(x_std, y_centered, n_components, set, fold_of, folds);
    if (err < best_err || (err == best_err && rho > best_rho)) {
      best_err = err;
      best_rho = rho;
      best_set = &set;
    }
  }
  if (!best_set) {
    // Every fold fit failed; fall back to the sparsest feasible set.
    for (const auto& [set, rho] : set_to_rho)
      if (rho > best_rho) {
        best_rho = rho;
        best_set = &set;
      }
  }
  return {best_rho, *best_set};
}

double alpha_ml(const Matrix& x_std, const Vector& y_centered, int n_components) {
  const Index p = x_std.cols();
  if (n_components < 1 || n_components > p)
    raise(ErrorKind::kInvalidArgument, "component count outside [1, P]");
  const double sx = x_std.squaredNorm();
  const double sy = y_centered.squaredNorm();
  if (sx <= 0.0) raise(ErrorKind::kInvalidArgument, "zero predictor matrix");

  Vector values;
  Matrix vectors;
  cross_product_eigen(x_std, values, vectors);
  const double explained = values.head(std::min<Index>(n_components, values.size())).sum();
  const double vx = std::max(0.0, sx - explained) / sx;

  if (sy <= 0.0) return 1.0;
  const Vector beta = Eigen::BDCSVD<Matrix>(x_std, Eigen::ComputeThinU | Eigen::ComputeThinV)
                          .solve(y_centered);
  const double rss = (y_centered - x_std * beta).squaredNorm();
  const double vy = std::max(rss / sy, 1e-12);
  return sx / (sx + sy * vx / vy);
}

ComponentModel fit_pcovr(const Matrix& x_std, const Vector& y_centered, int n_components,
                         double alpha) {
  const Index n = x_std.rows();
  const Index p = x_std.cols();
  if (alpha <= 0.0 || alpha > 1.0) raise(ErrorKind::kInvalidArgument, "alpha outside (0, 1]");
  if (n_components < 1) raise(ErrorKind::kInvalidArgument, "component count below 1");
  if (n <= n_components) raise(ErrorKind::kDegenerateDof, "no residual degrees of freedom");

  Eigen::BDCSVD<Matrix> svd(x_std, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) <= 0.0) raise(ErrorKind::kRankDeficient, "zero matrix");
  Index rank = 0;
  for (Index i = 0; i < sv.size(); ++i)
    if (sv(i) > sv(0) * kRelRankTol) ++rank;
  if (n_components > rank)
    raise(ErrorKind::kRankDeficient, "rank " + std::to_string(rank) + " below component count");

  const Matrix u = svd.matrixU().leftCols(rank);
  const Matrix v = svd.matrixV().leftCols(rank);
  const Vector sv_r = sv.head(rank);
  const double sx = sv.array().square().sum();
  const double sy = y_centered.squaredNorm();

  // Weighted fit matrix restricted to the column space of X; its top
  // eigenvectors give the orthonormal scores.
  const Vector uy = u.transpose() * y_centered;
  Matrix c = (alpha / sx) * Matrix(sv_r.array().square().matrix().asDiagonal());
  if (sy > 0.0) c += ((1.0 - alpha) / sy) * (uy * uy.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(c);
  if (solver.info() != Eigen::Success) raise(ErrorKind::kRankDeficient, "score solve failed");
  const Matrix basis = solver.eigenvectors().rowwise().reverse().leftCols(n_components);

  const Matrix scores = u * basis;
  ComponentModel model;
  model.kind = ModelKind::kPcovr;
  model.n_components = n_components;
  model.alpha = alpha;
  model.weights = v * sv_r.cwiseInverse().asDiagonal() * basis;
  model.loadings = x_std.transpose() * scores;
  model.outcome_loadings = scores.transpose() * y_centered;
  const double rss = (y_centered - scores * model.outcome_loadings).squaredNorm();
  model.residual_variance = rss / static_cast<double>(n - n_components);

  std::vector<double> flips;
  fix_column_signs(model.weights, &flips);
  for (Index j = 0; j < model.weights.cols(); ++j) {
    model.loadings.col(j) *= flips[static_cast<std::size_t>(j)];
    model.outcome_loadings(j) *= flips[static_cast<std::size_t>(j)];
  }
  model.coefficients = model.outcome_loadings;
  model.stats = StandardizationStats::identity(p);
  model.active_set = full_active_set(p);
  return model;
}

ComponentModel fit_pls(const Matrix& x_std, const Vector& y_centered, int n_components) {
  const Index n = x_std.rows();
  const Index p = x_std.cols();
  if (n_components < 1 || n_components > p)
    raise(ErrorKind::kInvalidArgument, "component count outside [1, P]");
  if (n <= n_components + 1) raise(ErrorKind::kDegenerateDof, "no residual degrees of freedom");

  const double x_scale = x_std.norm();
  Matrix deflated = x_std;
  Matrix w_deflated(p, n_components);
  Matrix loadings(p, n_components);
  Matrix scores(n, n_components);
  Vector gamma(n_components);

  for (int m = 0; m < n_components; ++m) {
    if (deflated.norm() <= 1e-12 * x_scale)
      raise(ErrorKind::kDeflationCollapse,
            "deflated matrix vanished at component " + std::to_string(m + 1));
    Vector w = deflated.transpose() * y_centered;
    const double wn = w.norm();
    if (wn <= 1e-12 * x_scale * std::max(1.0, y_centered.norm()))
      raise(ErrorKind::kDeflationCollapse,
            "outcome orthogonal to deflated matrix at component " + std::to_string(m + 1));
    w /= wn;
    Index imax = 0;
    w.cwiseAbs().maxCoeff(&imax);
    if (w(imax) < 0.0) w *= -1.0;

    const Vector t = deflated * w;
    const double tss = t.squaredNorm();
    if (tss <= 1e-24 * x_scale * x_scale)
      raise(ErrorKind::kDeflationCollapse, "zero score at component " + std::to_string(m + 1));
    const Vector load = deflated.transpose() * t / tss;

    w_deflated.col(m) = w;
    loadings.col(m) = load;
    scores.col(m) = t;
    gamma(m) = t.dot(y_centered) / tss;
    deflated -= t * load.transpose();
  }

  // Rotation mapping the undeflated matrix to the scores: T = X W (P'W)^-1.
  const Matrix a = loadings.transpose() * w_deflated;
  const Matrix rotation = w_deflated * a.partialPivLu().solve(Matrix::Identity(n_components, n_components));

  ComponentModel model;
  model.kind = ModelKind::kPls;
  model.n_components = n_components;
  model.weights = rotation;
  model.loadings = loadings;
  model.coefficients = gamma;
  model.outcome_loadings = gamma;
  const double rss = (y_centered - scores * gamma).squaredNorm();
  model.residual_variance = rss / static_cast<double>(n - n_components - 1);
  model.stats = StandardizationStats::identity(p);
  model.active_set = full_active_set(p);
  return model;
}

}  // namespace sdrmice::dimred
