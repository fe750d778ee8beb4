#include "synth/panel.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "synth/errors.hpp"

namespace synth {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(field);
      field.clear();
    } else if (ch != '\r') {
      field += ch;
    }
  }
  fields.push_back(field);
  return fields;
}

bool parse_double(const std::string& s, double& out) {
  const char* begin = s.data();
  const char* end = begin + s.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc{} && ptr == end && std::isfinite(out);
}

bool parse_integer(const std::string& s, long long& out) {
  if (s.empty()) return false;
  const char* begin = s.data();
  const char* end = begin + s.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc{} && ptr == end;
}

bool is_iso_date(const std::string& s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
  for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u})
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  return true;
}

std::string shortest_repr(double x) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, ptr);
}

}  // namespace

void Panel::validate() const {
  const int t = num_periods();
  const int n = num_units();
  if (n < 2) throw IngestError("panel needs one treated unit and at least one donor");
  if (outcomes.rows() != t || outcomes.cols() != n)
    throw IngestError("outcome matrix shape does not match units/times");
  if (t0 < 2) throw ConfigError("pre-treatment period count must be at least 2");
  if (t0 >= t) throw ConfigError("pre-treatment period count must be smaller than T");
  if (!outcomes.allFinite()) throw IngestError("outcome matrix contains non-finite values");
  if (!predictor_names.empty()) {
    if (predictors.rows() != static_cast<Eigen::Index>(predictor_names.size()) ||
        predictors.cols() != n)
      throw IngestError("predictor matrix shape does not match names/units");
    if (!predictors.allFinite()) throw IngestError("predictor matrix contains non-finite values");
  }
}

Panel load_panel(const std::string& path, const CsvSchema& schema,
                 const std::string& t0_marker) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot open panel file: " + path);
  return load_panel(in, schema, t0_marker);
}

Panel load_panel(std::istream& in, const CsvSchema& schema,
                 const std::string& t0_marker) {
  std::string line;
  if (!std::getline(in, line)) throw IngestError("empty panel file");
  const auto header = split_csv_line(line);

  auto column_of = [&](const std::string& name) -> int {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    return -1;
  };

  const int unit_col = column_of(schema.unit);
  const int time_col = column_of(schema.time);
  const int outcome_col = column_of(schema.outcome);
  if (unit_col < 0) throw IngestError("missing column: " + schema.unit);
  if (time_col < 0) throw IngestError("missing column: " + schema.time);
  if (outcome_col < 0) throw IngestError("missing column: " + schema.outcome);

  std::vector<std::string> predictor_names = schema.predictors;
  if (predictor_names.empty()) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      const int col = static_cast<int>(i);
      if (col != unit_col && col != time_col && col != outcome_col)
        predictor_names.push_back(header[i]);
    }
  }
  std::vector<int> predictor_cols;
  for (const auto& name : predictor_names) {
    const int col = column_of(name);
    if (col < 0) throw ConfigError("unknown predictor column: " + name);
    predictor_cols.push_back(col);
  }

  std::vector<std::string> units;
  std::vector<std::string> times;
  std::unordered_map<std::string, int> unit_index;
  std::unordered_map<std::string, int> time_index;
  struct Cell {
    double outcome;
    std::vector<double> predictors;
  };
  std::map<std::pair<int, int>, Cell> cells;  // (time, unit) -> values

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size())
      throw IngestError("line " + std::to_string(line_no) + ": expected " +
                        std::to_string(header.size()) + " fields, got " +
                        std::to_string(fields.size()));

    const std::string& unit = fields[unit_col];
    const std::string& time = fields[time_col];
    if (unit_index.emplace(unit, static_cast<int>(units.size())).second)
      units.push_back(unit);
    if (time_index.emplace(time, static_cast<int>(times.size())).second)
      times.push_back(time);

    Cell cell;
    if (!parse_double(fields[outcome_col], cell.outcome))
      throw IngestError("missing or invalid outcome for unit '" + unit +
                        "' at period '" + time + "'");
    cell.predictors.reserve(predictor_cols.size());
    for (std::size_t k = 0; k < predictor_cols.size(); ++k) {
      double value;
      if (!parse_double(fields[predictor_cols[k]], value))
        throw IngestError("missing or invalid predictor '" + predictor_names[k] +
                          "' for unit '" + unit + "' at period '" + time + "'");
      cell.predictors.push_back(value);
    }

    const auto key = std::make_pair(time_index[time], unit_index[unit]);
    if (!cells.emplace(key, std::move(cell)).second)
      throw IngestError("duplicate row for unit '" + unit + "' at period '" + time + "'");
  }

  if (units.size() < 2) throw IngestError("panel needs at least two units");
  if (times.size() < 3) throw IngestError("panel needs at least three periods");

  // Natural ordering: numeric when every label is an integer, lexicographic
  // when every label is an ISO date, otherwise first-appearance order.
  std::vector<int> time_order(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) time_order[i] = static_cast<int>(i);
  bool all_int = true;
  std::vector<long long> as_int(times.size());
  for (std::size_t i = 0; i < times.size(); ++i)
    if (!parse_integer(times[i], as_int[i])) {
      all_int = false;
      break;
    }
  if (all_int) {
    std::sort(time_order.begin(), time_order.end(),
              [&](int a, int b) { return as_int[a] < as_int[b]; });
  } else if (std::all_of(times.begin(), times.end(), is_iso_date)) {
    std::sort(time_order.begin(), time_order.end(),
              [&](int a, int b) { return times[a] < times[b]; });
  }

  // Treated unit goes to index 0; donors keep first-appearance order.
  std::vector<int> unit_order(units.size());
  for (std::size_t i = 0; i < units.size(); ++i) unit_order[i] = static_cast<int>(i);
  if (!schema.treated.empty()) {
    const auto it = unit_index.find(schema.treated);
    if (it == unit_index.end())
      throw ConfigError("treated unit '" + schema.treated + "' not present in file");
    std::rotate(unit_order.begin(), unit_order.begin() + it->second,
                unit_order.begin() + it->second + 1);
    std::sort(unit_order.begin() + 1, unit_order.end());
  }

  Panel panel;
  panel.units.reserve(units.size());
  for (int idx : unit_order) panel.units.push_back(units[idx]);
  panel.times.reserve(times.size());
  for (int idx : time_order) panel.times.push_back(times[idx]);

  const int t = static_cast<int>(times.size());
  const int n = static_cast<int>(units.size());
  panel.outcomes.resize(t, n);
  std::vector<Eigen::MatrixXd> predictor_values(
      predictor_names.size(), Eigen::MatrixXd(t, n));
  for (int row = 0; row < t; ++row) {
    for (int col = 0; col < n; ++col) {
      const auto it = cells.find({time_order[row], unit_order[col]});
      if (it == cells.end())
        throw IngestError("unbalanced panel: missing row for unit '" +
                          panel.units[col] + "' at period '" + panel.times[row] + "'");
      panel.outcomes(row, col) = it->second.outcome;
      for (std::size_t k = 0; k < predictor_names.size(); ++k)
        predictor_values[k](row, col) = it->second.predictors[k];
    }
  }

  const auto marker = std::find(panel.times.begin(), panel.times.end(), t0_marker);
  if (marker == panel.times.end())
    throw ConfigError("t0 marker '" + t0_marker + "' is not a period in the file");
  panel.t0 = static_cast<int>(marker - panel.times.begin()) + 1;

  panel.predictor_names = predictor_names;
  panel.predictors.resize(static_cast<Eigen::Index>(predictor_names.size()), n);
  for (std::size_t k = 0; k < predictor_names.size(); ++k)
    panel.predictors.row(static_cast<Eigen::Index>(k)) =
        predictor_values[k].topRows(panel.t0).colwise().mean();

  panel.validate();
  return panel;
}

void write_panel(const Panel& panel, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IngestError("cannot open output file: " + path);
  write_panel(panel, out);
}

void write_panel(const Panel& panel, std::ostream& out) {
  out << "unit,time,outcome\n";
  for (int col = 0; col < panel.num_units(); ++col)
    for (int row = 0; row < panel.num_periods(); ++row)
      out << panel.units[col] << ',' << panel.times[row] << ','
          << shortest_repr(panel.outcomes(row, col)) << '\n';
}

std::string panel_to_json(const Panel& panel) {
  nlohmann::json j;
  j["units"] = panel.units;
  j["times"] = panel.times;
  j["t0"] = panel.t0;
  j["t0_marker"] = panel.times[panel.t0 - 1];
  auto& rows = j["outcomes"] = nlohmann::json::array();
  for (int row = 0; row < panel.num_periods(); ++row) {
    nlohmann::json r = nlohmann::json::array();
    for (int col = 0; col < panel.num_units(); ++col) r.push_back(panel.outcomes(row, col));
    rows.push_back(std::move(r));
  }
  if (!panel.predictor_names.empty()) {
    j["predictor_names"] = panel.predictor_names;
    auto& pred = j["predictors"] = nlohmann::json::array();
    for (Eigen::Index row = 0; row < panel.predictors.rows(); ++row) {
      nlohmann::json r = nlohmann::json::array();
      for (int col = 0; col < panel.num_units(); ++col) r.push_back(panel.predictors(row, col));
      pred.push_back(std::move(r));
    }
  }
  return j.dump(2);
}

Panel tail_slice(const Panel& panel, int t0, int post) {
  if (t0 < 2) throw ConfigError("tail_slice t0 must be at least 2");
  if (post < 1) throw ConfigError("tail_slice post must be at least 1");
  const int keep = t0 + post;
  const int total = panel.num_periods();
  if (keep > total) throw ConfigError("tail_slice window longer than the panel");

  Panel out;
  out.units = panel.units;
  out.times.assign(panel.times.end() - keep, panel.times.end());
  out.outcomes = panel.outcomes.bottomRows(keep);
  out.t0 = t0;
  // Covariate pre-period means are not recomputable from stored means.
  out.predictor_names.clear();
  out.predictors.resize(0, panel.num_units());
  out.validate();
  return out;
}

}  // namespace synth
