#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <string>
#include <vector>

namespace synth {

/// A balanced panel for one treated unit and J donors over T periods.
/// Unit 0 is the treated unit. Immutable by convention after construction;
/// safe to share across threads.
struct Panel {
  std::vector<std::string> units;    ///< J+1 ids, index 0 = treated
  std::vector<std::string> times;    ///< T period labels, ascending
  Eigen::MatrixXd outcomes;          ///< T x (J+1)
  std::vector<std::string> predictor_names;  ///< K' covariate names (may be empty)
  Eigen::MatrixXd predictors;        ///< K' x (J+1), covariates averaged over t <= t0
  int t0 = 0;                        ///< pre-treatment period count, 2 <= t0 < T

  int num_periods() const { return static_cast<int>(times.size()); }
  int num_units() const { return static_cast<int>(units.size()); }
  int num_donors() const { return num_units() - 1; }
  int post_periods() const { return num_periods() - t0; }

  /// Throws IngestError/ConfigError if any structural invariant is violated.
  void validate() const;
};

/// Column-name mapping for long-format CSV ingestion.
struct CsvSchema {
  std::string unit = "unit";
  std::string time = "time";
  std::string outcome = "outcome";
  /// Covariate columns to ingest; empty means every remaining column.
  std::vector<std::string> predictors;
  /// Treated unit id; empty means the first unit appearing in the file.
  std::string treated;
};

/// Loads a long-format CSV (header unit,time,outcome[,covariates...]).
/// Donor order is first-appearance order. Times sort ascending when all
/// labels parse as integers or ISO dates, otherwise keep file order.
/// t0_marker names the last pre-treatment period.
Panel load_panel(const std::string& path, const CsvSchema& schema,
                 const std::string& t0_marker);
Panel load_panel(std::istream& in, const CsvSchema& schema,
                 const std::string& t0_marker);

/// Writes the outcome block back to long CSV. Values round-trip bit-exactly
/// (shortest-representation formatting). Covariates are not written: the
/// panel stores only their pre-period means.
void write_panel(const Panel& panel, const std::string& path);
void write_panel(const Panel& panel, std::ostream& out);

/// JSON export for provenance (units, times, t0, outcomes, predictors).
std::string panel_to_json(const Panel& panel);

/// The sub-panel holding the last (t0 + post) periods with the pre-treatment
/// cutoff moved to t0. Used by experiments that vary t0 over nested windows.
Panel tail_slice(const Panel& panel, int t0, int post);

}  // namespace synth
