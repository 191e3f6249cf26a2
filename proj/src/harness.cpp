#include "sdrmice/harness.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <mutex>
#include <thread>
#include <tuple>
#include <utility>

#include "sdrmice/datagen.hpp"
#include "sdrmice/mice.hpp"
#include "sdrmice/rng.hpp"

namespace sdrmice::harness {

namespace {

constexpr std::uint64_t kDataStream = 0x64617461;    // data generation
constexpr std::uint64_t kMaskStream = 0x6d61736b;    // amputation
constexpr std::uint64_t kImputeStream = 0x696d7075;  // imputation chains

const std::vector<int> kAnalysisColumns = {0, 1, 2};

std::uint64_t data_seed(const ConditionGrid& grid, int n_latent, int rep) {
  std::uint64_t h = seed_mix(grid.base_seed, kDataStream);
  h = seed_mix(h, static_cast<std::uint64_t>(n_latent));
  h = seed_mix(h, static_cast<std::uint64_t>(rep));
  return h;
}

std::uint64_t mask_seed(const ConditionGrid& grid, int n_latent, ampute::Mechanism mech,
                        double pm, int rep) {
  std::uint64_t h = seed_mix(grid.base_seed, kMaskStream);
  h = seed_mix(h, static_cast<std::uint64_t>(n_latent));
  h = seed_mix(h, static_cast<std::uint64_t>(mech));
  h = seed_mix(h, std::bit_cast<std::uint64_t>(pm));
  h = seed_mix(h, static_cast<std::uint64_t>(rep));
  return h;
}

std::uint64_t impute_seed(const ConditionGrid& grid, const Condition& cond, int rep) {
  std::uint64_t h = seed_mix(grid.base_seed, kImputeStream);
  h = seed_mix(h, static_cast<std::uint64_t>(cond.n_latent));
  h = seed_mix(h, static_cast<std::uint64_t>(cond.mech));
  h = seed_mix(h, std::bit_cast<std::uint64_t>(cond.pm));
  h = seed_mix(h, static_cast<std::uint64_t>(cond.method));
  h = seed_mix(h, static_cast<std::uint64_t>(cond.nc));
  h = seed_mix(h, static_cast<std::uint64_t>(rep));
  return h;
}

std::vector<double> default_spcr_grid() {
  std::vector<double> grid;
  for (int i = 1; i <= 19; ++i) grid.push_back(0.05 * i);
  return grid;
}

imp::ImputerSpec imputer_spec(const ConditionGrid& grid, const Condition& cond) {
  imp::ImputerSpec spec;
  spec.n_components = cond.nc;
  spec.am_columns = kAnalysisColumns;
  spec.qp_threshold = grid.qp_threshold;
  spec.cv_folds = grid.cv_folds;
  spec.threshold_grid = grid.spcr_grid.empty() ? default_spcr_grid() : grid.spcr_grid;
  switch (cond.method) {
    case Method::kMiPcr: spec.method = imp::Method::kPcr; break;
    case Method::kMiSpcr: spec.method = imp::Method::kSpcr; break;
    case Method::kMiPcovr: spec.method = imp::Method::kPcovr; break;
    case Method::kMiPls: spec.method = imp::Method::kPlsr; break;
    case Method::kMiQp: spec.method = imp::Method::kQp; break;
    case Method::kMiAm: spec.method = imp::Method::kAm; break;
    case Method::kMiAll: spec.method = imp::Method::kAll; break;
    default: raise(ErrorKind::kInvalidArgument, "not an imputation method");
  }
  return spec;
}

analysis::PoolScale pool_scale(const analysis::Estimand& estimand) {
  return estimand.kind == analysis::EstimandKind::kCorrelation ? analysis::PoolScale::kFisherZ
                                                               : analysis::PoolScale::kIdentity;
}

Matrix complete_case_rows(const DataMatrix& data, const std::vector<int>& columns) {
  std::vector<Index> keep;
  for (Index i = 0; i < data.n_rows(); ++i) {
    bool ok = true;
    for (const int c : columns)
      if (data.missing(i, c)) {
        ok = false;
        break;
      }
    if (ok) keep.push_back(i);
  }
  Matrix out(static_cast<Index>(keep.size()), data.n_cols());
  for (std::size_t i = 0; i < keep.size(); ++i) out.row(static_cast<Index>(i)) = data.values.row(keep[i]);
  return out;
}

}  // namespace

const char* method_label(Method method) {
  switch (method) {
    case Method::kMiPcr: return "MI-PCR";
    case Method::kMiSpcr: return "MI-SPCR";
    case Method::kMiPcovr: return "MI-PCovR";
    case Method::kMiPls: return "MI-PLS";
    case Method::kMiQp: return "MI-QP";
    case Method::kMiAm: return "MI-AM";
    case Method::kMiAll: return "MI-ALL";
    case Method::kCc: return "CC";
    case Method::kFo: return "FO";
  }
  return "?";
}

Method method_from_label(const std::string& label) {
  static const std::map<std::string, Method> lookup = {
      {"MI-PCR", Method::kMiPcr},   {"MI-SPCR", Method::kMiSpcr}, {"MI-PCovR", Method::kMiPcovr},
      {"MI-PLS", Method::kMiPls},   {"MI-QP", Method::kMiQp},     {"MI-AM", Method::kMiAm},
      {"MI-ALL", Method::kMiAll},   {"CC", Method::kCc},          {"FO", Method::kFo},
  };
  const auto it = lookup.find(label);
  if (it == lookup.end()) raise(ErrorKind::kConfigError, "unknown method '" + label + "'");
  return it->second;
}

bool is_component_method(Method method) {
  switch (method) {
    case Method::kMiPcr:
    case Method::kMiSpcr:
    case Method::kMiPcovr:
    case Method::kMiPls:
      return true;
    default:
      return false;
  }
}

ConditionGrid ConditionGrid::desk_profile() {
  ConditionGrid grid;
  grid.latent_levels = {2, 10};
  grid.mech_levels = {ampute::Mechanism::kMar};
  grid.pm_levels = {0.5};
  grid.methods = {Method::kMiPcr, Method::kMiSpcr, Method::kMiPcovr, Method::kMiPls,
                  Method::kMiQp,  Method::kMiAm,   Method::kMiAll,   Method::kCc,
                  Method::kFo};
  grid.nc_levels = {1, 2, 3, 4, 5, 6};
  grid.replications = 50;
  grid.spcr_grid = default_spcr_grid();
  return grid;
}

ConditionGrid ConditionGrid::paper_profile() {
  ConditionGrid grid = desk_profile();
  grid.latent_levels = {2, 10, 50};
  grid.mech_levels = {ampute::Mechanism::kMcar, ampute::Mechanism::kMar};
  grid.pm_levels = {0.1, 0.25, 0.5};
  grid.nc_levels = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 20, 29, 30, 40, 48, 49, 50, 51, 52, 60, 149};
  grid.replications = 240;
  return grid;
}

std::vector<Condition> expand_grid(const ConditionGrid& grid) {
  if (grid.latent_levels.empty() || grid.mech_levels.empty() || grid.pm_levels.empty() ||
      grid.methods.empty())
    raise(ErrorKind::kEmptyGrid, "a factor has no levels");
  std::vector<Condition> conditions;
  for (const int l : grid.latent_levels)
    for (const ampute::Mechanism mech : grid.mech_levels)
      for (const double pm : grid.pm_levels)
        for (const Method method : grid.methods) {
          if (!is_component_method(method)) {
            conditions.push_back({l, mech, pm, method, 0});
            continue;
          }
          const int max_nc = 3 * l - 1;  // predictor columns available per target
          if (grid.nc_levels.empty()) raise(ErrorKind::kEmptyGrid, "no component levels");
          for (const int nc : grid.nc_levels) {
            if (nc < 1 || nc > max_nc) continue;
            conditions.push_back({l, mech, pm, method, nc});
          }
        }
  if (conditions.empty()) raise(ErrorKind::kEmptyGrid, "grid expands to no conditions");
  return conditions;
}

ReplicationData make_replication_data(const ConditionGrid& grid, int n_latent,
                                      ampute::Mechanism mech, double pm, int rep) {
  datagen::FactorSpec spec;
  spec.n_rows = grid.n_rows;
  spec.n_latent = n_latent;
  Rng data_rng(data_seed(grid, n_latent, rep));
  ReplicationData out;
  out.full = datagen::generate(spec, data_rng);

  ampute::MissingnessSpec miss;
  miss.mechanism = mech;
  miss.pm = pm;
  Rng mask_rng(mask_seed(grid, n_latent, mech, pm, rep));
  out.amputed = ampute::ampute(out.full, miss, mask_rng);
  return out;
}

ReplicationOutput run_replication(const ConditionGrid& grid, const Condition& cond, int rep,
                                  bool collect_traces) {
  const ReplicationData data = make_replication_data(grid, cond.n_latent, cond.mech, cond.pm, rep);
  const std::vector<analysis::Estimand> estimands = analysis::default_estimands();

  std::vector<analysis::EstimateResult> full_estimates;
  full_estimates.reserve(estimands.size());
  for (const auto& e : estimands) full_estimates.push_back(analysis::estimate(data.full.values, e));

  ReplicationOutput out;
  auto emit = [&](std::size_t idx, const analysis::PooledEstimate& pooled) {
    out.records.push_back({cond, rep, estimands[idx].label(), pooled.point, pooled.ci_lower,
                           pooled.ci_upper, full_estimates[idx].point, "ok"});
  };
  auto emit_failed = [&](const Error& err) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t idx = 0; idx < estimands.size(); ++idx)
      out.records.push_back({cond, rep, estimands[idx].label(), nan, nan, nan,
                             full_estimates[idx].point,
                             std::string("failed:") + err.kind_name()});
  };

  switch (cond.method) {
    case Method::kFo: {
      for (std::size_t idx = 0; idx < estimands.size(); ++idx)
        emit(idx, analysis::pool({full_estimates[idx]}, pool_scale(estimands[idx])));
      break;
    }
    case Method::kCc: {
      const Matrix complete = complete_case_rows(data.amputed, kAnalysisColumns);
      const double nan = std::numeric_limits<double>::quiet_NaN();
      for (std::size_t idx = 0; idx < estimands.size(); ++idx) {
        try {
          const analysis::EstimateResult est = analysis::estimate(complete, estimands[idx]);
          emit(idx, analysis::pool({est}, pool_scale(estimands[idx])));
        } catch (const Error& err) {
          out.records.push_back({cond, rep, estimands[idx].label(), nan, nan, nan,
                                 full_estimates[idx].point,
                                 std::string("failed:") + err.kind_name()});
        }
      }
      break;
    }
    default: {
      mice::MiceConfig config;
      config.n_imputations = grid.n_imputations;
      config.n_iterations = grid.n_iterations;
      config.visit_order = data.amputed.columns_with_missing();
      config.imputer = imputer_spec(grid, cond);
      config.seed = impute_seed(grid, cond, rep);
      try {
        const mice::ImputedSet imputed = mice::run_mice(data.amputed, config);
        for (std::size_t idx = 0; idx < estimands.size(); ++idx) {
          std::vector<analysis::EstimateResult> per_dataset;
          per_dataset.reserve(imputed.datasets.size());
          for (const Matrix& dataset : imputed.datasets)
            per_dataset.push_back(analysis::estimate(dataset, estimands[idx]));
          emit(idx, analysis::pool(per_dataset, pool_scale(estimands[idx])));
        }
        if (collect_traces) {
          for (std::size_t chain = 0; chain < imputed.traces.size(); ++chain)
            for (const mice::TraceEntry& entry : imputed.traces[chain])
              out.traces.push_back({cond, rep, static_cast<int>(chain) + 1, entry.iteration,
                                    data.amputed.labels[entry.column], entry.mean, entry.sd});
        }
      } catch (const Error& err) {
        emit_failed(err);
      }
      break;
    }
  }
  return out;
}

RunResult run(const ConditionGrid& grid, int workers) {
  const std::vector<Condition> conditions = expand_grid(grid);
  struct Task {
    Condition cond;
    int rep;
    bool traces;
  };
  std::vector<Task> tasks;
  tasks.reserve(conditions.size() * static_cast<std::size_t>(grid.replications));
  for (const Condition& cond : conditions)
    for (int rep = 0; rep < grid.replications; ++rep)
      tasks.push_back({cond, rep, rep == 0 && cond.method != Method::kCc && cond.method != Method::kFo});

  std::vector<ReplicationOutput> slots(tasks.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  const int n_workers = std::max(1, std::min<int>(workers, static_cast<int>(tasks.size())));
  auto work = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      try {
        slots[i] = run_replication(grid, tasks[i].cond, tasks[i].rep, tasks[i].traces);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(n_workers));
  for (int w = 0; w < n_workers; ++w) pool.emplace_back(work);
  for (std::thread& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  RunResult result;
  for (ReplicationOutput& slot : slots) {
    result.records.insert(result.records.end(), std::make_move_iterator(slot.records.begin()),
                          std::make_move_iterator(slot.records.end()));
    result.traces.insert(result.traces.end(), std::make_move_iterator(slot.traces.begin()),
                         std::make_move_iterator(slot.traces.end()));
  }
  return result;
}

std::vector<MetricRow> summarize(const std::vector<ResultRecord>& records) {
  using Key = std::tuple<int, int, double, int, int, std::string>;
  struct Cell {
    Condition cond;
    std::string estimand;
    std::vector<double> points;
    std::vector<std::pair<double, double>> bounds;
    std::vector<double> truths;
    int n_total = 0;
  };
  std::map<Key, Cell> cells;
  for (const ResultRecord& record : records) {
    const Key key{record.cond.n_latent, static_cast<int>(record.cond.mech), record.cond.pm,
                  static_cast<int>(record.cond.method), record.cond.nc, record.estimand};
    Cell& cell = cells[key];
    cell.cond = record.cond;
    cell.estimand = record.estimand;
    ++cell.n_total;
    if (record.status == "ok") {
      cell.points.push_back(record.estimate);
      cell.bounds.emplace_back(record.ci_lower, record.ci_upper);
      cell.truths.push_back(record.truth);
    }
  }

  std::vector<MetricRow> rows;
  rows.reserve(cells.size());
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& [key, cell] : cells) {
    MetricRow row{cell.cond, cell.estimand, nan, nan, nan, static_cast<int>(cell.points.size())};
    if (!cell.points.empty()) {
      double truth = 0.0;
      for (const double t : cell.truths) truth += t;
      truth /= static_cast<double>(cell.truths.size());
      row.prb = analysis::prb(cell.points, truth);
      row.ciw = analysis::ciw(cell.bounds);
      row.cic = analysis::cic(cell.bounds, truth);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace sdrmice::harness
