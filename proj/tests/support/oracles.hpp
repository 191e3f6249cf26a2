#pragma once

// Independent reference computations for the test suites. Everything here is
// deliberately written against Eigen primitives (or plain loops), not against
// the library's own code paths.

#include <Eigen/Dense>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <cmath>
#include <vector>

#include "sdrmice/rng.hpp"
#include "sdrmice/types.hpp"

namespace oracle {

using sdrmice::Index;
using sdrmice::Matrix;
using sdrmice::Rng;
using sdrmice::Vector;

inline Matrix random_matrix(Index n, Index p, Rng& rng) {
  Matrix m(n, p);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < p; ++j) m(i, j) = rng.normal();
  return m;
}

// Random matrix with correlated columns so component structure is non-trivial.
inline Matrix random_correlated_matrix(Index n, Index p, Rng& rng) {
  const Matrix base = random_matrix(n, p, rng);
  const Matrix mix = random_matrix(p, p, rng);
  return base * (Matrix::Identity(p, p) + 0.35 * mix);
}

inline double mean(const Vector& v) { return v.mean(); }

inline double sample_variance(const Vector& v) {
  const double m = v.mean();
  return (v.array() - m).square().sum() / static_cast<double>(v.size() - 1);
}

inline double sample_covariance(const Vector& a, const Vector& b) {
  const double ma = a.mean();
  const double mb = b.mean();
  return ((a.array() - ma) * (b.array() - mb)).sum() / static_cast<double>(a.size() - 1);
}

inline double pearson(const Vector& a, const Vector& b) {
  const double sab = sample_covariance(a, b);
  const double saa = sample_variance(a);
  const double sbb = sample_variance(b);
  if (saa <= 0.0 || sbb <= 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

// Least-squares fit without intercept via a rank-revealing QR.
inline Vector ols(const Matrix& x, const Vector& y) {
  return x.fullPivHouseholderQr().solve(y);
}

inline Vector ols_predictions(const Matrix& x, const Vector& y) { return x * ols(x, y); }

// Least-squares fit with explicit intercept; returns (intercept, slopes...).
inline Vector ols_with_intercept(const Matrix& x, const Vector& y) {
  Matrix design(x.rows(), x.cols() + 1);
  design.col(0).setOnes();
  design.rightCols(x.cols()) = x;
  return design.fullPivHouseholderQr().solve(y);
}

// Orthonormal basis of the column span.
inline Matrix orthonormal_basis(const Matrix& m) {
  Eigen::HouseholderQR<Matrix> qr(m);
  Matrix q = qr.householderQ() * Matrix::Identity(m.rows(), m.cols());
  return q;
}

// Largest principal-angle sine between two column spans of equal dimension,
// computed as the residual of projecting one basis onto the other.
inline double subspace_sin(const Matrix& a, const Matrix& b) {
  const Matrix qa = orthonormal_basis(a);
  const Matrix qb = orthonormal_basis(b);
  const Matrix residual = qb - qa * (qa.transpose() * qb);
  Eigen::JacobiSVD<Matrix> svd(residual);
  return svd.singularValues().size() > 0 ? svd.singularValues()(0) : 0.0;
}

// Top-q left singular subspace.
inline Matrix svd_left_subspace(const Matrix& x, Index q) {
  Eigen::JacobiSVD<Matrix> svd(x, Eigen::ComputeThinU);
  return svd.matrixU().leftCols(q);
}

// Exactly correlated design: returns (x, y) where column j of x has sample
// correlation target[j] with y, built from an orthonormal frame that is also
// orthogonal to the constant vector (so sample correlations are exact).
inline std::pair<Matrix, Vector> exact_correlation_design(Index n,
                                                          const std::vector<double>& targets,
                                                          Rng& rng) {
  const Index k = static_cast<Index>(targets.size());
  Matrix raw(n, k + 2);
  raw.col(0).setOnes();
  for (Index j = 1; j < k + 2; ++j)
    for (Index i = 0; i < n; ++i) raw(i, j) = rng.normal();
  const Matrix q = orthonormal_basis(raw);
  const Vector y = q.col(1);  // unit norm, zero mean
  Matrix x(n, k);
  for (Index j = 0; j < k; ++j) {
    const double rho = targets[static_cast<std::size_t>(j)];
    // Each column mixes y with its own orthogonal direction, so the sample
    // correlation with y is exactly rho.
    x.col(j) = rho * y + std::sqrt(1.0 - rho * rho) * q.col(j + 2);
  }
  return {x, y};
}

// Logistic regression by Newton iterations; returns coefficients for
// (intercept, predictors...).
inline Vector logistic_fit(const Matrix& x, const std::vector<int>& outcome) {
  const Index n = x.rows();
  Matrix design(n, x.cols() + 1);
  design.col(0).setOnes();
  design.rightCols(x.cols()) = x;
  Vector beta = Vector::Zero(design.cols());
  for (int iter = 0; iter < 50; ++iter) {
    Vector eta = design * beta;
    Vector p(n);
    Vector w(n);
    for (Index i = 0; i < n; ++i) {
      p(i) = 1.0 / (1.0 + std::exp(-eta(i)));
      w(i) = std::max(p(i) * (1.0 - p(i)), 1e-10);
    }
    Vector grad = Vector::Zero(design.cols());
    Matrix hess = Matrix::Zero(design.cols(), design.cols());
    for (Index i = 0; i < n; ++i) {
      const double resid = static_cast<double>(outcome[static_cast<std::size_t>(i)]) - p(i);
      grad += resid * design.row(i).transpose();
      hess += w(i) * design.row(i).transpose() * design.row(i);
    }
    const Vector step = hess.ldlt().solve(grad);
    beta += step;
    if (step.norm() < 1e-10) break;
  }
  return beta;
}

inline double log_likelihood(const Matrix& x, const std::vector<int>& outcome,
                             const Vector& beta) {
  const Index n = x.rows();
  Matrix design(n, x.cols() + 1);
  design.col(0).setOnes();
  design.rightCols(x.cols()) = x;
  const Vector eta = design * beta;
  double ll = 0.0;
  for (Index i = 0; i < n; ++i) {
    const double p = 1.0 / (1.0 + std::exp(-eta(i)));
    const double pc = std::clamp(p, 1e-12, 1.0 - 1e-12);
    ll += outcome[static_cast<std::size_t>(i)] ? std::log(pc) : std::log(1.0 - pc);
  }
  return ll;
}

// McFadden pseudo R^2 of a logistic regression of the outcome on x.
inline double mcfadden_r2(const Matrix& x, const std::vector<int>& outcome) {
  const Vector beta = logistic_fit(x, outcome);
  const double ll = log_likelihood(x, outcome, beta);
  const Matrix empty(x.rows(), 0);
  const Vector beta0 = logistic_fit(empty, outcome);
  const double ll0 = log_likelihood(empty, outcome, beta0);
  return 1.0 - ll / ll0;
}

// Rank-based AUC of a score against a binary outcome.
inline double auc(const Vector& score, const std::vector<int>& outcome) {
  std::vector<std::pair<double, int>> pairs;
  pairs.reserve(static_cast<std::size_t>(score.size()));
  for (Index i = 0; i < score.size(); ++i)
    pairs.emplace_back(score(i), outcome[static_cast<std::size_t>(i)]);
  std::sort(pairs.begin(), pairs.end());
  double rank_sum = 0.0;
  std::size_t n_pos = 0;
  std::size_t i = 0;
  double rank = 1.0;
  while (i < pairs.size()) {
    std::size_t j = i;
    while (j + 1 < pairs.size() && pairs[j + 1].first == pairs[i].first) ++j;
    const double avg_rank = 0.5 * (rank + rank + static_cast<double>(j - i));
    for (std::size_t k = i; k <= j; ++k)
      if (pairs[k].second) {
        rank_sum += avg_rank;
        ++n_pos;
      }
    rank += static_cast<double>(j - i + 1);
    i = j + 1;
  }
  const std::size_t n_neg = pairs.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) return 0.5;
  return (rank_sum - 0.5 * static_cast<double>(n_pos) * static_cast<double>(n_pos + 1)) /
         (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

}  // namespace oracle
