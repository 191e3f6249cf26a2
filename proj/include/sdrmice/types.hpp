#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace sdrmice {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

enum class ErrorKind {
  kConstantColumn,
  kRankDeficient,
  kDegenerateDof,
  kNoFeasibleThreshold,
  kDeflationCollapse,
  kTooFewObserved,
  kInfeasibleComponents,
  kSingularDesign,
  kAllMissingColumn,
  kNotPositiveDefinite,
  kDegenerateSample,
  kZeroTruth,
  kEmptyGrid,
  kConfigError,
  kIoError,
  kInvalidArgument,
};

const char* error_kind_name(ErrorKind kind);

/// Library-wide exception; `kind()` identifies the failure class that the
/// simulation harness records in result status fields.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(error_kind_name(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  const char* kind_name() const noexcept { return error_kind_name(kind_); }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void raise(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

/// Column-labeled numeric matrix with a parallel missingness mask.
/// `missing(i, j) == true` marks cell (i, j) as unobserved; `values` keeps the
/// original entry there so amputation never destroys data.
struct DataMatrix {
  Matrix values;
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> missing;
  std::vector<std::string> labels;

  DataMatrix() = default;

  static DataMatrix complete(Matrix values, std::vector<std::string> labels = {});

  Index n_rows() const { return values.rows(); }
  Index n_cols() const { return values.cols(); }

  bool any_missing(Index col) const;
  Index n_missing(Index col) const;
  std::vector<Index> observed_rows(Index col) const;
  std::vector<Index> missing_rows(Index col) const;
  /// Columns with at least one missing cell, ascending.
  std::vector<int> columns_with_missing() const;
};

inline DataMatrix DataMatrix::complete(Matrix values, std::vector<std::string> labels) {
  DataMatrix out;
  out.missing.setConstant(values.rows(), values.cols(), false);
  if (labels.empty()) {
    labels.reserve(static_cast<std::size_t>(values.cols()));
    for (Index j = 0; j < values.cols(); ++j) labels.push_back("z" + std::to_string(j + 1));
  }
  out.values = std::move(values);
  out.labels = std::move(labels);
  return out;
}

inline bool DataMatrix::any_missing(Index col) const {
  for (Index i = 0; i < missing.rows(); ++i)
    if (missing(i, col)) return true;
  return false;
}

inline Index DataMatrix::n_missing(Index col) const {
  Index n = 0;
  for (Index i = 0; i < missing.rows(); ++i) n += missing(i, col) ? 1 : 0;
  return n;
}

inline std::vector<Index> DataMatrix::observed_rows(Index col) const {
  std::vector<Index> rows;
  rows.reserve(static_cast<std::size_t>(missing.rows()));
  for (Index i = 0; i < missing.rows(); ++i)
    if (!missing(i, col)) rows.push_back(i);
  return rows;
}

inline std::vector<Index> DataMatrix::missing_rows(Index col) const {
  std::vector<Index> rows;
  for (Index i = 0; i < missing.rows(); ++i)
    if (missing(i, col)) rows.push_back(i);
  return rows;
}

inline std::vector<int> DataMatrix::columns_with_missing() const {
  std::vector<int> cols;
  for (Index j = 0; j < n_cols(); ++j)
    if (any_missing(j)) cols.push_back(static_cast<int>(j));
  return cols;
}

inline const char* error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConstantColumn: return "ConstantColumn";
    case ErrorKind::kRankDeficient: return "RankDeficient";
    case ErrorKind::kDegenerateDof: return "DegenerateDof";
    case ErrorKind::kNoFeasibleThreshold: return "NoFeasibleThreshold";
    case ErrorKind::kDeflationCollapse: return "DeflationCollapse";
    case ErrorKind::kTooFewObserved: return "TooFewObserved";
    case ErrorKind::kInfeasibleComponents: return "InfeasibleComponents";
    case ErrorKind::kSingularDesign: return "SingularDesign";
    case ErrorKind::kAllMissingColumn: return "AllMissingColumn";
    case ErrorKind::kNotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorKind::kDegenerateSample: return "DegenerateSample";
    case ErrorKind::kZeroTruth: return "ZeroTruth";
    case ErrorKind::kEmptyGrid: return "EmptyGrid";
    case ErrorKind::kConfigError: return "ConfigError";
    case ErrorKind::kIoError: return "IoError";
    case ErrorKind::kInvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace sdrmice
