#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "sdrmice/amputation.hpp"
#include "sdrmice/analysis.hpp"
#include "sdrmice/types.hpp"

namespace sdrmice::harness {

enum class Method { kMiPcr, kMiSpcr, kMiPcovr, kMiPls, kMiQp, kMiAm, kMiAll, kCc, kFo };

const char* method_label(Method method);
Method method_from_label(const std::string& label);
bool is_component_method(Method method);

/// Full experimental factor grid plus shared run settings.
struct ConditionGrid {
  std::vector<int> latent_levels = {2, 10};
  std::vector<ampute::Mechanism> mech_levels = {ampute::Mechanism::kMar};
  std::vector<double> pm_levels = {0.5};
  std::vector<Method> methods;
  std::vector<int> nc_levels;
  int replications = 50;
  int n_imputations = 5;
  int n_iterations = 20;
  std::uint64_t base_seed = 20260810;
  int n_rows = 1000;
  std::vector<double> spcr_grid;  // defaults to 0.05, 0.10, ..., 0.95
  int cv_folds = 5;
  double qp_threshold = 0.1;

  static ConditionGrid desk_profile();
  static ConditionGrid paper_profile();
};

struct Condition {
  int n_latent;
  ampute::Mechanism mech;
  double pm;
  Method method;
  int nc;  // 0 for non-component methods
};

struct ResultRecord {
  Condition cond;
  int rep;
  std::string estimand;
  double estimate;
  double ci_lower;
  double ci_upper;
  double truth;  // this replication's full-data estimate
  std::string status;  // "ok" or "failed:<ErrorKind>"
};

struct TraceRow {
  Condition cond;
  int rep;
  int chain;
  int iteration;
  std::string variable;
  double mean;
  double sd;
};

struct MetricRow {
  Condition cond;
  std::string estimand;
  double prb;
  double ciw;
  double cic;
  int n_ok;
};

/// Cartesian expansion of the grid. nc levels apply only to component
/// methods and are dropped when they exceed the predictor capacity 3L-1;
/// non-component methods get a single condition with nc = 0.
std::vector<Condition> expand_grid(const ConditionGrid& grid);

/// Data and mask for one replication cell; shared by all methods so that
/// method comparisons are paired. Seeds derive from (base_seed, L, rep) for
/// the data and (base_seed, L, mech, pm, rep) for the mask.
struct ReplicationData {
  DataMatrix full;
  DataMatrix amputed;
};
ReplicationData make_replication_data(const ConditionGrid& grid, int n_latent,
                                      ampute::Mechanism mech, double pm, int rep);

struct ReplicationOutput {
  std::vector<ResultRecord> records;
  std::vector<TraceRow> traces;
};

/// Generate -> ampute -> treat -> estimate -> pool for one condition and
/// replication. Imputer failures become failed-status records.
ReplicationOutput run_replication(const ConditionGrid& grid, const Condition& cond, int rep,
                                  bool collect_traces = false);

struct RunResult {
  std::vector<ResultRecord> records;
  std::vector<TraceRow> traces;
};

/// All conditions x replications on a bounded worker pool. Results are merged
/// in deterministic task order; the worker count never affects output.
RunResult run(const ConditionGrid& grid, int workers);

/// Across-replication metrics per (condition, estimand) cell, computed over
/// ok records; cells with no ok record carry NaN metrics and n_ok = 0.
std::vector<MetricRow> summarize(const std::vector<ResultRecord>& records);

// -- persistence ------------------------------------------------------------

void write_results_csv(const std::filesystem::path& path,
                       const std::vector<ResultRecord>& records);
std::vector<ResultRecord> read_results_csv(const std::filesystem::path& path);
void write_summary_csv(const std::filesystem::path& path,
                       const std::vector<MetricRow>& rows);
void write_traces_csv(const std::filesystem::path& path,
                      const std::vector<TraceRow>& traces);
std::vector<TraceRow> read_traces_csv(const std::filesystem::path& path);

/// key = value configuration mirroring the grid fields; '#' starts a comment,
/// lists are comma-separated. Unknown keys are errors.
void apply_config_file(const std::filesystem::path& path, ConditionGrid& grid);
ConditionGrid parse_config(const std::filesystem::path& path);

/// 17-significant-digit formatting used in every CSV.
std::string format_double(double x);

}  // namespace sdrmice::harness
