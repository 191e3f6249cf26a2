#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "sdrmice/imputers.hpp"
#include "sdrmice/types.hpp"

namespace sdrmice::mice {

struct MiceConfig {
  int n_imputations = 5;
  int n_iterations = 20;
  std::vector<int> visit_order;  // target columns, imputed in this order
  imp::ImputerSpec imputer;
  std::uint64_t seed = 0;

  /// Test/extension hook: when set, replaces the configured imputer.
  /// Arguments: target, predictor matrix, target column, iteration (1-based).
  using CustomImputer = std::function<imp::ImputationDraw(
      const imp::MaskedColumn&, const Matrix&, int, int, Rng&)>;
  CustomImputer custom_imputer;
};

struct TraceEntry {
  int iteration;  // 1-based
  int column;
  double mean;    // mean of the imputed cells after this iteration
  double sd;      // sample sd of the imputed cells (0 when fewer than 2)
};

struct ChainState {
  Matrix completed;
  std::vector<TraceEntry> trace;
};

struct ChainDiagnostics {
  int chain;
  int iteration;
  int column;
  imp::DrawDiagnostics diagnostics;
};

struct ImputedSet {
  std::vector<Matrix> datasets;
  std::vector<std::vector<TraceEntry>> traces;
  std::vector<ChainDiagnostics> diagnostics;
};

/// Fill every missing cell with a uniform draw from its column's observed
/// values. Throws AllMissingColumn if a column has no observed value.
ChainState initialize(const DataMatrix& data, Rng& rng);

/// One chain: initialize, then for each iteration impute every column in
/// visit_order against the freshest completed values of all other columns.
ChainState run_chain(const DataMatrix& data, const MiceConfig& config, Rng& rng);

/// Seed for chain `chain_index` derived from the configured seed.
std::uint64_t chain_seed(std::uint64_t seed, int chain_index);

/// n_imputations independent chains, each deterministically seeded.
ImputedSet run_mice(const DataMatrix& data, const MiceConfig& config);

}  // namespace sdrmice::mice
