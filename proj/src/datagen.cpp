#include "sdrmice/datagen.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

namespace sdrmice::datagen {

namespace {

void validate(const FactorSpec& spec) {
  if (spec.n_rows < 2) raise(ErrorKind::kInvalidArgument, "need at least 2 rows");
  if (spec.n_latent < 2) raise(ErrorKind::kInvalidArgument, "need at least 2 latent variables");
  if (spec.items_per_latent < 1) raise(ErrorKind::kInvalidArgument, "need at least 1 item per latent");
  if (spec.loading <= 0.0 || spec.loading >= 1.0)
    raise(ErrorKind::kInvalidArgument, "loading outside (0, 1)");
  if (spec.target_var <= 0.0) raise(ErrorKind::kInvalidArgument, "target variance not positive");
}

}  // namespace

Matrix build_psi(const FactorSpec& spec) {
  validate(spec);
  const int l = spec.n_latent;
  Matrix psi = Matrix::Constant(l, l, spec.corr_other);
  psi.diagonal().setOnes();
  psi(0, 1) = spec.corr_12;
  psi(1, 0) = spec.corr_12;

  Eigen::SelfAdjointEigenSolver<Matrix> solver(psi);
  if (solver.info() != Eigen::Success || solver.eigenvalues().minCoeff() <= 0.0)
    raise(ErrorKind::kNotPositiveDefinite,
          "latent correlation matrix for L = " + std::to_string(l));
  return psi;
}

DataMatrix generate(const FactorSpec& spec, Rng& rng) {
  const Matrix psi = build_psi(spec);
  const Index n = spec.n_rows;
  const Index l = spec.n_latent;
  const Index p = spec.n_items();

  const Matrix chol = Eigen::LLT<Matrix>(psi).matrixL();
  Matrix latent(n, l);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < l; ++j) latent(i, j) = rng.normal();
  latent = latent * chol.transpose();

  const double error_sd = std::sqrt(1.0 - spec.loading * spec.loading);
  Matrix z(n, p);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < p; ++j) z(i, j) = error_sd * rng.normal();

  // Simple structure: item j measures latent j / items_per_latent.
  for (Index j = 0; j < p; ++j)
    z.col(j) += spec.loading * latent.col(j / spec.items_per_latent);

  const double target_sd = std::sqrt(spec.target_var);
  for (Index j = 0; j < p; ++j) {
    const double mean = z.col(j).mean();
    const double sd = std::sqrt((z.col(j).array() - mean).square().sum() / static_cast<double>(n - 1));
    z.col(j) = spec.target_mean + ((z.col(j).array() - mean) / sd) * target_sd;
  }
  return DataMatrix::complete(std::move(z));
}

void export_delimited(const std::filesystem::path& path, const DataMatrix& data) {
  std::ofstream out(path);
  if (!out) raise(ErrorKind::kIoError, "cannot write " + path.string());
  for (std::size_t j = 0; j < data.labels.size(); ++j)
    out << (j == 0 ? "" : ",") << data.labels[j];
  out << '\n';
  char buffer[64];
  for (Index i = 0; i < data.n_rows(); ++i) {
    for (Index j = 0; j < data.n_cols(); ++j) {
      std::snprintf(buffer, sizeof(buffer), "%.17g", data.values(i, j));
      out << (j == 0 ? "" : ",") << buffer;
    }
    out << '\n';
  }
}

}  // namespace sdrmice::datagen
