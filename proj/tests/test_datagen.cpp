#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "sdrmice/datagen.hpp"
#include "support/oracles.hpp"

using namespace sdrmice;
using namespace sdrmice::datagen;

namespace {

Matrix empirical_correlation(const Matrix& values) {
  const Index p = values.cols();
  Matrix corr(p, p);
  for (Index a = 0; a < p; ++a)
    for (Index b = 0; b < p; ++b) corr(a, b) = oracle::pearson(values.col(a), values.col(b));
  return corr;
}

// Item-level correlation implied by the generating model before rescaling.
Matrix implied_correlation(const FactorSpec& spec) {
  const Matrix psi = build_psi(spec);
  const Index p = spec.n_items();
  Matrix corr(p, p);
  for (Index a = 0; a < p; ++a)
    for (Index b = 0; b < p; ++b) {
      if (a == b) {
        corr(a, b) = 1.0;
        continue;
      }
      const Index fa = a / spec.items_per_latent;
      const Index fb = b / spec.items_per_latent;
      corr(a, b) = spec.loading * spec.loading * psi(fa, fb);
    }
  return corr;
}

}  // namespace

TEST_CASE("the two-factor latent correlation matrix is exact") {
  FactorSpec spec;
  spec.n_latent = 2;
  const Matrix psi = build_psi(spec);
  CHECK(psi(0, 0) == 1.0);
  CHECK(psi(1, 1) == 1.0);
  CHECK(psi(0, 1) == 0.8);
  CHECK(psi(1, 0) == 0.8);
}

TEST_CASE("additional latent variables correlate at the background level") {
  FactorSpec spec;
  spec.n_latent = 3;
  const Matrix psi = build_psi(spec);
  CHECK(psi(0, 1) == 0.8);
  CHECK(psi(0, 2) == 0.1);
  CHECK(psi(1, 2) == 0.1);
}

TEST_CASE("the latent correlation matrix stays positive definite at fifty factors") {
  FactorSpec spec;
  spec.n_latent = 50;
  const Matrix psi = build_psi(spec);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(psi);
  CHECK(solver.eigenvalues().minCoeff() > 0.0);
}

TEST_CASE("an infeasible background correlation is rejected") {
  FactorSpec spec;
  spec.n_latent = 10;
  spec.corr_other = -0.5;
  try {
    build_psi(spec);
    FAIL("expected NotPositiveDefinite");
  } catch (const Error& err) {
    CHECK(err.kind() == ErrorKind::kNotPositiveDefinite);
  }
}

TEST_CASE("generated data has the requested shape, labels and exact moments") {
  FactorSpec spec;
  spec.n_latent = 10;
  Rng rng(2024);
  const DataMatrix data = generate(spec, rng);
  CHECK(data.n_rows() == 1000);
  CHECK(data.n_cols() == 30);
  CHECK(data.labels.front() == "z1");
  CHECK(data.labels.back() == "z30");
  for (Index j = 0; j < data.n_cols(); ++j) {
    CHECK(oracle::mean(data.values.col(j)) == doctest::Approx(5.0).epsilon(1e-9));
    CHECK(oracle::sample_variance(data.values.col(j)) == doctest::Approx(6.5).epsilon(1e-9));
  }
}

TEST_CASE("item correlations land near the implied block structure") {
  FactorSpec spec;
  spec.n_latent = 10;
  Rng rng(99);
  const DataMatrix data = generate(spec, rng);
  const Matrix corr = empirical_correlation(data.values);

  double within = 0.0;
  int n_within = 0;
  for (Index scale = 0; scale < 10; ++scale)
    for (Index a = 3 * scale; a < 3 * scale + 3; ++a)
      for (Index b = a + 1; b < 3 * scale + 3; ++b) {
        within += corr(a, b);
        ++n_within;
      }
  within /= n_within;
  CHECK(std::abs(within - 0.72) < 0.04);

  double first_second = 0.0;
  for (Index a = 0; a < 3; ++a)
    for (Index b = 3; b < 6; ++b) first_second += corr(a, b);
  first_second /= 9.0;
  CHECK(std::abs(first_second - 0.58) < 0.05);

  double first_rest = 0.0;
  int n_rest = 0;
  for (Index a = 0; a < 3; ++a)
    for (Index b = 6; b < 30; ++b) {
      first_rest += corr(a, b);
      ++n_rest;
    }
  first_rest /= n_rest;
  CHECK(std::abs(first_rest - 0.07) < 0.05);
}

TEST_CASE("the empirical correlation matrix tracks the implied one") {
  FactorSpec spec;
  spec.n_latent = 10;
  Rng rng(123);
  const DataMatrix data = generate(spec, rng);
  const Matrix corr = empirical_correlation(data.values);
  const Matrix implied = implied_correlation(spec);
  CHECK((corr - implied).cwiseAbs().maxCoeff() < 0.15);
}

TEST_CASE("delimited export carries the header row and full-precision values") {
  FactorSpec spec;
  spec.n_latent = 2;
  spec.n_rows = 10;
  Rng rng(55);
  const DataMatrix data = generate(spec, rng);
  const auto path = std::filesystem::temp_directory_path() / "sdrmice_export_test.csv";
  export_delimited(path, data);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "z1,z2,z3,z4,z5,z6");
  std::string first_row;
  std::getline(in, first_row);
  const double first_value = std::strtod(first_row.c_str(), nullptr);
  CHECK(first_value == data.values(0, 0));
  int rows = 2;  // header + first row already consumed
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 11);
  std::filesystem::remove(path);
}

TEST_CASE("column-wise affine maps leave the correlations unchanged") {
  FactorSpec spec;
  spec.n_latent = 2;
  spec.n_rows = 500;
  Rng rng(7);
  const DataMatrix data = generate(spec, rng);
  const Matrix corr = empirical_correlation(data.values);
  Matrix shifted = data.values;
  for (Index j = 0; j < shifted.cols(); ++j)
    shifted.col(j) = shifted.col(j).array() * (2.0 + static_cast<double>(j)) - 11.0;
  const Matrix corr_shifted = empirical_correlation(shifted);
  CHECK((corr - corr_shifted).cwiseAbs().maxCoeff() < 1e-12);
}
