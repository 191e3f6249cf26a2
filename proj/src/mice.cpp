#include "sdrmice/mice.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <utility>

namespace sdrmice::mice {

namespace {

std::string column_label(const DataMatrix& data, int col) {
  if (col >= 0 && static_cast<std::size_t>(col) < data.labels.size()) return data.labels[col];
  return "column " + std::to_string(col);
}

std::vector<int> predictor_columns(const imp::ImputerSpec& spec, int target, Index n_cols,
                                   const std::map<int, std::vector<int>>& qp_sets) {
  std::vector<int> cols;
  switch (spec.method) {
    case imp::Method::kAm:
      for (const int c : spec.am_columns)
        if (c != target) cols.push_back(c);
      break;
    case imp::Method::kQp:
      cols = qp_sets.at(target);
      break;
    default:
      for (Index c = 0; c < n_cols; ++c)
        if (static_cast<int>(c) != target) cols.push_back(static_cast<int>(c));
      break;
  }
  return cols;
}

imp::ImputationDraw dispatch(const imp::ImputerSpec& spec, const imp::MaskedColumn& target,
                             const Matrix& predictors, Rng& rng) {
  switch (spec.method) {
    case imp::Method::kPcr:
      return imp::impute_pcr(target, predictors, spec.n_components, rng);
    case imp::Method::kSpcr:
      return imp::impute_spcr(target, predictors, spec.n_components, spec.threshold_grid,
                              spec.cv_folds, rng);
    case imp::Method::kPcovr:
      return imp::impute_pcovr(target, predictors, spec.n_components, rng);
    case imp::Method::kPlsr:
      return imp::impute_plsr(target, predictors, spec.n_components, rng);
    case imp::Method::kAll:
    case imp::Method::kQp:
    case imp::Method::kAm:
      return imp::impute_normlinear(target, predictors, rng);
  }
  raise(ErrorKind::kInvalidArgument, "unknown imputation method");
}

ChainState run_chain_impl(const DataMatrix& data, const MiceConfig& config, Rng& rng,
                          int chain_index, std::vector<ChainDiagnostics>* diagnostics_sink) {
  if (config.n_iterations < 1) raise(ErrorKind::kInvalidArgument, "iterations below 1");
  for (const int j : config.visit_order)
    if (j < 0 || j >= data.n_cols())
      raise(ErrorKind::kInvalidArgument, "visit column out of range");

  ChainState state = initialize(data, rng);

  std::map<int, std::vector<int>> qp_sets;
  if (config.imputer.method == imp::Method::kQp && !config.custom_imputer) {
    for (const int j : config.visit_order) {
      std::vector<int> sel = imp::quickpred_select(data, j, config.imputer.qp_threshold);
      if (sel.empty())
        for (const int c : config.imputer.am_columns)
          if (c != j) sel.push_back(c);
      qp_sets.emplace(j, std::move(sel));
    }
  }

  const Index n = data.n_rows();
  for (int iter = 1; iter <= config.n_iterations; ++iter) {
    for (const int j : config.visit_order) {
      imp::MaskedColumn target;
      target.values = data.values.col(j);
      target.missing.resize(static_cast<std::size_t>(n));
      for (Index i = 0; i < n; ++i) target.missing[static_cast<std::size_t>(i)] = data.missing(i, j);

      imp::ImputationDraw draw;
      try {
        if (config.custom_imputer) {
          Matrix predictors(n, data.n_cols() - 1);
          Index out = 0;
          for (Index c = 0; c < data.n_cols(); ++c)
            if (static_cast<int>(c) != j) predictors.col(out++) = state.completed.col(c);
          draw = config.custom_imputer(target, predictors, j, iter, rng);
        } else {
          const std::vector<int> cols =
              predictor_columns(config.imputer, j, data.n_cols(), qp_sets);
          Matrix predictors(n, static_cast<Index>(cols.size()));
          for (std::size_t c = 0; c < cols.size(); ++c)
            predictors.col(static_cast<Index>(c)) = state.completed.col(cols[c]);
          draw = dispatch(config.imputer, target, predictors, rng);
        }
      } catch (const Error& err) {
        throw Error(err.kind(), std::string(err.what()) + " (iteration " + std::to_string(iter) +
                                    ", variable " + column_label(data, j) + ")");
      }

      Index k = 0;
      for (Index i = 0; i < n; ++i)
        if (data.missing(i, j)) state.completed(i, j) = draw.values(k++);

      if (diagnostics_sink)
        diagnostics_sink->push_back({chain_index, iter, j, std::move(draw.diagnostics)});
    }

    for (const int j : config.visit_order) {
      double mean = 0.0;
      double sd = 0.0;
      Index count = 0;
      for (Index i = 0; i < n; ++i)
        if (data.missing(i, j)) {
          mean += state.completed(i, j);
          ++count;
        }
      if (count > 0) mean /= static_cast<double>(count);
      if (count > 1) {
        double ss = 0.0;
        for (Index i = 0; i < n; ++i)
          if (data.missing(i, j)) {
            const double d = state.completed(i, j) - mean;
            ss += d * d;
          }
        sd = std::sqrt(ss / static_cast<double>(count - 1));
      }
      state.trace.push_back({iter, j, mean, sd});
    }
  }
  return state;
}

}  // namespace

ChainState initialize(const DataMatrix& data, Rng& rng) {
  ChainState state;
  state.completed = data.values;
  for (Index j = 0; j < data.n_cols(); ++j) {
    const std::vector<Index> missing = data.missing_rows(j);
    if (missing.empty()) continue;
    const std::vector<Index> observed = data.observed_rows(j);
    if (observed.empty())
      raise(ErrorKind::kAllMissingColumn, "no observed values in " + column_label(data, static_cast<int>(j)));
    for (const Index row : missing)
      state.completed(row, j) = data.values(observed[rng.uniform_index(observed.size())], j);
  }
  return state;
}

ChainState run_chain(const DataMatrix& data, const MiceConfig& config, Rng& rng) {
  return run_chain_impl(data, config, rng, 0, nullptr);
}

std::uint64_t chain_seed(std::uint64_t seed, int chain_index) {
  return seed_mix(seed, static_cast<std::uint64_t>(chain_index) + 1);
}

ImputedSet run_mice(const DataMatrix& data, const MiceConfig& config) {
  if (config.n_imputations < 1) raise(ErrorKind::kInvalidArgument, "imputations below 1");
  ImputedSet set;
  for (int c = 0; c < config.n_imputations; ++c) {
    Rng rng(chain_seed(config.seed, c));
    try {
      ChainState state = run_chain_impl(data, config, rng, c, &set.diagnostics);
      set.datasets.push_back(std::move(state.completed));
      set.traces.push_back(std::move(state.trace));
    } catch (const Error& err) {
      throw Error(err.kind(),
                  std::string(err.what()) + " (chain " + std::to_string(c + 1) + ")");
    }
  }
  return set;
}

}  // namespace sdrmice::mice
