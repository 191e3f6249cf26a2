#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <vector>

#include "sdrmice/harness.hpp"

using namespace sdrmice;
using namespace sdrmice::harness;

namespace fs = std::filesystem;

namespace {

ConditionGrid tiny_grid() {
  ConditionGrid grid;
  grid.latent_levels = {2};
  grid.mech_levels = {ampute::Mechanism::kMcar};
  grid.pm_levels = {0.25};
  grid.methods = {Method::kMiPcr, Method::kCc, Method::kFo};
  grid.nc_levels = {2};
  grid.replications = 2;
  grid.n_imputations = 2;
  grid.n_iterations = 3;
  grid.n_rows = 200;
  grid.base_seed = 11;
  return grid;
}

std::string file_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

}  // namespace

TEST_CASE("grid expansion drops component counts beyond the predictor capacity") {
  ConditionGrid grid = tiny_grid();
  grid.methods = {Method::kMiPcr};
  grid.nc_levels = {1, 2, 5, 6};
  const std::vector<Condition> conditions = expand_grid(grid);
  std::set<int> ncs;
  for (const Condition& c : conditions) ncs.insert(c.nc);
  CHECK(ncs == std::set<int>{1, 2, 5});  // six columns leave five predictors
}

TEST_CASE("non-component methods expand to a single condition with nc zero") {
  ConditionGrid grid = tiny_grid();
  grid.methods = {Method::kCc};
  grid.nc_levels = {1, 2, 3};
  const std::vector<Condition> conditions = expand_grid(grid);
  CHECK(conditions.size() == 1);
  CHECK(conditions[0].nc == 0);
}

TEST_CASE("the full component grid at ten latents keeps only feasible levels") {
  ConditionGrid grid = ConditionGrid::paper_profile();
  grid.latent_levels = {10};
  grid.mech_levels = {ampute::Mechanism::kMar};
  grid.pm_levels = {0.5};
  grid.methods = {Method::kMiSpcr};
  const std::vector<Condition> conditions = expand_grid(grid);
  // 1..12, 20, 29 are at or below 3L-1 = 29; everything above drops out.
  CHECK(conditions.size() == 14);
  for (const Condition& c : conditions) CHECK(c.nc <= 29);
}

TEST_CASE("replication records are deterministic") {
  const ConditionGrid grid = tiny_grid();
  const Condition cond{2, ampute::Mechanism::kMcar, 0.25, Method::kMiPcr, 2};
  const ReplicationOutput a = run_replication(grid, cond, 1);
  const ReplicationOutput b = run_replication(grid, cond, 1);
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    CHECK(a.records[i].estimate == b.records[i].estimate);
    CHECK(a.records[i].ci_lower == b.records[i].ci_lower);
    CHECK(a.records[i].truth == b.records[i].truth);
    CHECK(a.records[i].status == b.records[i].status);
  }
}

TEST_CASE("all methods inside one replication cell share data and mask") {
  const ConditionGrid grid = tiny_grid();
  const Condition pcr{2, ampute::Mechanism::kMcar, 0.25, Method::kMiPcr, 2};
  const Condition cc{2, ampute::Mechanism::kMcar, 0.25, Method::kCc, 0};
  const Condition fo{2, ampute::Mechanism::kMcar, 0.25, Method::kFo, 0};
  const ReplicationOutput a = run_replication(grid, pcr, 0);
  const ReplicationOutput b = run_replication(grid, cc, 0);
  const ReplicationOutput c = run_replication(grid, fo, 0);
  REQUIRE(a.records.size() == b.records.size());
  REQUIRE(a.records.size() == c.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    // The truth column is the replication's full-data estimate; identical
    // bytes across methods proves the shared dataset.
    CHECK(a.records[i].truth == b.records[i].truth);
    CHECK(a.records[i].truth == c.records[i].truth);
  }

  const ReplicationData d1 = make_replication_data(grid, 2, ampute::Mechanism::kMcar, 0.25, 0);
  const ReplicationData d2 = make_replication_data(grid, 2, ampute::Mechanism::kMcar, 0.25, 0);
  CHECK((d1.full.values - d2.full.values).cwiseAbs().maxCoeff() == 0.0);
  CHECK(d1.amputed.missing == d2.amputed.missing);
}

TEST_CASE("full-data analysis has zero bias by construction") {
  const ConditionGrid grid = tiny_grid();
  const Condition fo{2, ampute::Mechanism::kMcar, 0.25, Method::kFo, 0};
  std::vector<ResultRecord> records;
  for (int rep = 0; rep < 3; ++rep) {
    const ReplicationOutput out = run_replication(grid, fo, rep);
    records.insert(records.end(), out.records.begin(), out.records.end());
  }
  for (const MetricRow& row : summarize(records)) {
    CHECK(row.n_ok == 3);
    CHECK(row.prb < 1e-10);
    CHECK(row.cic == 1.0);
  }
}

TEST_CASE("the worker count never changes the output bytes") {
  const ConditionGrid grid = tiny_grid();
  const RunResult serial = run(grid, 1);
  const RunResult parallel = run(grid, 4);

  const fs::path dir = fs::temp_directory_path() / "sdrmice_worker_test";
  fs::create_directories(dir);
  write_results_csv(dir / "serial.csv", serial.records);
  write_results_csv(dir / "parallel.csv", parallel.records);
  CHECK(file_bytes(dir / "serial.csv") == file_bytes(dir / "parallel.csv"));

  write_traces_csv(dir / "serial_traces.csv", serial.traces);
  write_traces_csv(dir / "parallel_traces.csv", parallel.traces);
  CHECK(file_bytes(dir / "serial_traces.csv") == file_bytes(dir / "parallel_traces.csv"));
  fs::remove_all(dir);
}

TEST_CASE("results survive a round trip through the csv format") {
  const ConditionGrid grid = tiny_grid();
  const RunResult result = run(grid, 2);
  const fs::path dir = fs::temp_directory_path() / "sdrmice_roundtrip_test";
  fs::create_directories(dir);
  write_results_csv(dir / "results.csv", result.records);
  const std::vector<ResultRecord> back = read_results_csv(dir / "results.csv");
  REQUIRE(back.size() == result.records.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].cond.n_latent == result.records[i].cond.n_latent);
    CHECK(back[i].cond.pm == result.records[i].cond.pm);
    CHECK(back[i].cond.method == result.records[i].cond.method);
    CHECK(back[i].rep == result.records[i].rep);
    CHECK(back[i].estimand == result.records[i].estimand);
    CHECK(back[i].estimate == result.records[i].estimate);
    CHECK(back[i].ci_lower == result.records[i].ci_lower);
    CHECK(back[i].ci_upper == result.records[i].ci_upper);
    CHECK(back[i].truth == result.records[i].truth);
    CHECK(back[i].status == result.records[i].status);
  }
  fs::remove_all(dir);
}

TEST_CASE("summary metrics match an independent recomputation") {
  const ConditionGrid grid = tiny_grid();
  const RunResult result = run(grid, 2);
  const std::vector<MetricRow> rows = summarize(result.records);
  for (const MetricRow& row : rows) {
    std::vector<double> points, truths;
    std::vector<std::pair<double, double>> bounds;
    for (const ResultRecord& r : result.records) {
      if (r.estimand != row.estimand || r.cond.method != row.cond.method ||
          r.cond.nc != row.cond.nc || r.status != "ok")
        continue;
      points.push_back(r.estimate);
      truths.push_back(r.truth);
      bounds.emplace_back(r.ci_lower, r.ci_upper);
    }
    REQUIRE(static_cast<int>(points.size()) == row.n_ok);
    double truth = 0.0;
    for (const double t : truths) truth += t;
    truth /= static_cast<double>(truths.size());
    double mean = 0.0;
    for (const double p : points) mean += p;
    mean /= static_cast<double>(points.size());
    CHECK(row.prb == doctest::Approx(std::abs((mean - truth) / truth) * 100.0).epsilon(1e-12));
    double width = 0.0;
    int covered = 0;
    for (const auto& [lo, hi] : bounds) {
      width += hi - lo;
      if (lo <= truth && truth <= hi) ++covered;
    }
    CHECK(row.ciw == doctest::Approx(width / points.size()).epsilon(1e-12));
    CHECK(row.cic == doctest::Approx(static_cast<double>(covered) / points.size()).epsilon(1e-12));
  }
}

TEST_CASE("component methods fail loudly at the saturated component count") {
  ConditionGrid grid = tiny_grid();
  grid.latent_levels = {10};
  grid.mech_levels = {ampute::Mechanism::kMar};
  grid.pm_levels = {0.5};
  grid.n_rows = 400;
  grid.n_imputations = 2;
  grid.n_iterations = 2;
  const Condition cond{10, ampute::Mechanism::kMar, 0.5, Method::kMiSpcr, 29};
  const ReplicationOutput out = run_replication(grid, cond, 0);
  REQUIRE(!out.records.empty());
  for (const ResultRecord& r : out.records) {
    CHECK((r.status == "failed:NoFeasibleThreshold" ||
           r.status == "failed:InfeasibleComponents"));
    CHECK(std::isnan(r.estimate));
  }

  const Condition pcr{10, ampute::Mechanism::kMar, 0.5, Method::kMiPcr, 29};
  for (const ResultRecord& r : run_replication(grid, pcr, 0).records)
    CHECK(r.status == "failed:InfeasibleComponents");
}

TEST_CASE("traces are collected for the first replication of imputation methods") {
  const ConditionGrid grid = tiny_grid();
  const RunResult result = run(grid, 2);
  bool pcr_traces = false;
  for (const TraceRow& t : result.traces) {
    CHECK(t.rep == 0);
    CHECK(t.cond.method == Method::kMiPcr);
    pcr_traces = true;
    CHECK(t.iteration >= 1);
    CHECK(t.iteration <= grid.n_iterations);
    CHECK((t.chain == 1 || t.chain == 2));
  }
  CHECK(pcr_traces);
}

TEST_CASE("configuration files override the profile and reject unknown keys") {
  const fs::path dir = fs::temp_directory_path() / "sdrmice_config_test";
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "good.cfg");
    out << "# comment line\n";
    out << "L = 2, 10\n";
    out << "mech = MCAR\n";
    out << "pm = 0.1, 0.5\n";
    out << "methods = MI-SPCR, FO\n";
    out << "nc = 2, 3\n";
    out << "reps = 7\n";
    out << "rows = 321\n";
    out << "seed = 99\n";
    out << "cv_folds = 4\n";
    out << "qp_threshold = 0.2\n";
    out << "spcr_grid = 0.1, 0.5\n";
    out << "imputations = 3\n";
    out << "iterations = 9\n";
  }
  const ConditionGrid grid = parse_config(dir / "good.cfg");
  CHECK(grid.latent_levels == std::vector<int>{2, 10});
  CHECK(grid.mech_levels.size() == 1);
  CHECK(grid.pm_levels == std::vector<double>{0.1, 0.5});
  CHECK(grid.methods.size() == 2);
  CHECK(grid.nc_levels == std::vector<int>{2, 3});
  CHECK(grid.replications == 7);
  CHECK(grid.n_rows == 321);
  CHECK(grid.base_seed == 99);
  CHECK(grid.cv_folds == 4);
  CHECK(grid.qp_threshold == 0.2);
  CHECK(grid.spcr_grid == std::vector<double>{0.1, 0.5});
  CHECK(grid.n_imputations == 3);
  CHECK(grid.n_iterations == 9);

  {
    std::ofstream out(dir / "bad.cfg");
    out << "latent = 2\n";
  }
  try {
    parse_config(dir / "bad.cfg");
    FAIL("expected ConfigError");
  } catch (const Error& err) {
    CHECK(err.kind() == ErrorKind::kConfigError);
  }
  fs::remove_all(dir);
}
