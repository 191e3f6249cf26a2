#include "sdrmice/harness.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace sdrmice::harness {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, sep)) fields.push_back(field);
  if (!line.empty() && line.back() == sep) fields.emplace_back();
  return fields;
}

double parse_double(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str()) raise(ErrorKind::kIoError, "not a number: '" + s + "'");
  return v;
}

int parse_int(const std::string& s) {
  try {
    return std::stoi(trim(s));
  } catch (const std::exception&) {
    raise(ErrorKind::kIoError, "not an integer: '" + s + "'");
  }
}

ampute::Mechanism mechanism_from_label(const std::string& label) {
  if (label == "MCAR") return ampute::Mechanism::kMcar;
  if (label == "MAR") return ampute::Mechanism::kMar;
  raise(ErrorKind::kConfigError, "unknown mechanism '" + label + "'");
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) raise(ErrorKind::kIoError, "cannot write " + path.string());
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) raise(ErrorKind::kIoError, "cannot read " + path.string());
  return in;
}

void write_condition(std::ostream& out, const Condition& cond) {
  out << cond.n_latent << ',' << ampute::mechanism_label(cond.mech) << ','
      << format_double(cond.pm) << ',' << method_label(cond.method) << ',' << cond.nc;
}

Condition parse_condition(const std::vector<std::string>& fields) {
  Condition cond;
  cond.n_latent = parse_int(fields[0]);
  cond.mech = mechanism_from_label(fields[1]);
  cond.pm = parse_double(fields[2]);
  cond.method = method_from_label(fields[3]);
  cond.nc = parse_int(fields[4]);
  return cond;
}

}  // namespace

std::string format_double(double x) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", x);
  return buffer;
}

void write_results_csv(const std::filesystem::path& path,
                       const std::vector<ResultRecord>& records) {
  std::ofstream out = open_out(path);
  out << "L,mech,pm,method,nc,rep,estimand,estimate,ci_lower,ci_upper,truth,status\n";
  for (const ResultRecord& r : records) {
    write_condition(out, r.cond);
    out << ',' << r.rep << ',' << r.estimand << ',' << format_double(r.estimate) << ','
        << format_double(r.ci_lower) << ',' << format_double(r.ci_upper) << ','
        << format_double(r.truth) << ',' << r.status << '\n';
  }
}

std::vector<ResultRecord> read_results_csv(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line) ||
      trim(line) != "L,mech,pm,method,nc,rep,estimand,estimate,ci_lower,ci_upper,truth,status")
    raise(ErrorKind::kIoError, "unexpected results header in " + path.string());
  std::vector<ResultRecord> records;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const std::vector<std::string> fields = split(line, ',');
    if (fields.size() != 12) raise(ErrorKind::kIoError, "malformed results row: '" + line + "'");
    ResultRecord r;
    r.cond = parse_condition(fields);
    r.rep = parse_int(fields[5]);
    r.estimand = fields[6];
    r.estimate = parse_double(fields[7]);
    r.ci_lower = parse_double(fields[8]);
    r.ci_upper = parse_double(fields[9]);
    r.truth = parse_double(fields[10]);
    r.status = fields[11];
    records.push_back(std::move(r));
  }
  return records;
}

void write_summary_csv(const std::filesystem::path& path, const std::vector<MetricRow>& rows) {
  std::ofstream out = open_out(path);
  out << "L,mech,pm,method,nc,estimand,prb,ciw,cic,n_ok\n";
  for (const MetricRow& row : rows) {
    write_condition(out, row.cond);
    out << ',' << row.estimand << ',' << format_double(row.prb) << ',' << format_double(row.ciw)
        << ',' << format_double(row.cic) << ',' << row.n_ok << '\n';
  }
}

void write_traces_csv(const std::filesystem::path& path, const std::vector<TraceRow>& traces) {
  std::ofstream out = open_out(path);
  out << "L,mech,pm,method,nc,rep,chain,iteration,variable,mean,sd\n";
  for (const TraceRow& t : traces) {
    write_condition(out, t.cond);
    out << ',' << t.rep << ',' << t.chain << ',' << t.iteration << ',' << t.variable << ','
        << format_double(t.mean) << ',' << format_double(t.sd) << '\n';
  }
}

std::vector<TraceRow> read_traces_csv(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line) ||
      trim(line) != "L,mech,pm,method,nc,rep,chain,iteration,variable,mean,sd")
    raise(ErrorKind::kIoError, "unexpected traces header in " + path.string());
  std::vector<TraceRow> traces;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const std::vector<std::string> fields = split(line, ',');
    if (fields.size() != 11) raise(ErrorKind::kIoError, "malformed trace row: '" + line + "'");
    TraceRow t;
    t.cond = parse_condition(fields);
    t.rep = parse_int(fields[5]);
    t.chain = parse_int(fields[6]);
    t.iteration = parse_int(fields[7]);
    t.variable = fields[8];
    t.mean = parse_double(fields[9]);
    t.sd = parse_double(fields[10]);
    traces.push_back(std::move(t));
  }
  return traces;
}

void apply_config_file(const std::filesystem::path& path, ConditionGrid& grid) {
  std::ifstream in = open_in(path);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      raise(ErrorKind::kConfigError,
            "line " + std::to_string(line_no) + " is not 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    std::vector<std::string> items;
    for (const std::string& item : split(value, ',')) {
      const std::string t = trim(item);
      if (!t.empty()) items.push_back(t);
    }
    if (items.empty())
      raise(ErrorKind::kConfigError, "key '" + key + "' has no value");

    if (key == "rows") {
      grid.n_rows = parse_int(value);
    } else if (key == "reps") {
      grid.replications = parse_int(value);
    } else if (key == "imputations") {
      grid.n_imputations = parse_int(value);
    } else if (key == "iterations") {
      grid.n_iterations = parse_int(value);
    } else if (key == "seed") {
      grid.base_seed = std::strtoull(value.c_str(), nullptr, 10);
    } else if (key == "cv_folds") {
      grid.cv_folds = parse_int(value);
    } else if (key == "qp_threshold") {
      grid.qp_threshold = parse_double(value);
    } else if (key == "L") {
      grid.latent_levels.clear();
      for (const auto& item : items) grid.latent_levels.push_back(parse_int(item));
    } else if (key == "mech") {
      grid.mech_levels.clear();
      for (const auto& item : items) grid.mech_levels.push_back(mechanism_from_label(item));
    } else if (key == "pm") {
      grid.pm_levels.clear();
      for (const auto& item : items) grid.pm_levels.push_back(parse_double(item));
    } else if (key == "methods") {
      grid.methods.clear();
      for (const auto& item : items) grid.methods.push_back(method_from_label(item));
    } else if (key == "nc") {
      grid.nc_levels.clear();
      for (const auto& item : items) grid.nc_levels.push_back(parse_int(item));
    } else if (key == "spcr_grid") {
      grid.spcr_grid.clear();
      for (const auto& item : items) grid.spcr_grid.push_back(parse_double(item));
    } else {
      raise(ErrorKind::kConfigError, "unknown key '" + key + "'");
    }
  }
}

ConditionGrid parse_config(const std::filesystem::path& path) {
  ConditionGrid grid = ConditionGrid::desk_profile();
  apply_config_file(path, grid);
  return grid;
}

}  // namespace sdrmice::harness
