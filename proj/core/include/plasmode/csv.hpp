#pragma once

#include <Eigen/Core>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "plasmode/dataset.hpp"

namespace plasmode {

// Parse/shape failure with 1-based row and column location when known.
class CsvError : public std::runtime_error {
 public:
  CsvError(std::string msg, long row, long col)
      : std::runtime_error(std::move(msg)), row_(row), col_(col) {}
  long row() const { return row_; }
  long col() const { return col_; }

 private:
  long row_;
  long col_;
};

// Shortest text form that parses back to the same double (17 significant
// digits for finite values).
std::string format_double(double x);

struct CovariateTable {
  Eigen::MatrixXd w;
  std::vector<std::string> names;
};

// Covariate CSV: one header row of column names, then numeric rows. Rejects
// non-numeric and non-finite entries, naming the offending row and column.
// If expected_names is given, the header must match it exactly.
CovariateTable load_covariates_csv(std::istream& in,
                                   const std::optional<std::vector<std::string>>& expected_names =
                                       std::nullopt);
CovariateTable load_covariates_csv_file(const std::string& path,
                                        const std::optional<std::vector<std::string>>&
                                            expected_names = std::nullopt);
void write_covariates_csv(std::ostream& out, const Eigen::MatrixXd& w,
                          const std::vector<std::string>& names);

// Full source dataset (covariates, then "a" and "y" columns).
void write_source_csv(std::ostream& out, const Dataset& d);
Dataset read_source_csv(std::istream& in, OutcomeKind kind);

// Per-replicate estimates table.
void write_estimates_csv(std::ostream& out, const std::vector<EstimateRecord>& records);
std::vector<EstimateRecord> read_estimates_csv(std::istream& in);
std::vector<EstimateRecord> read_estimates_csv_file(const std::string& path);

// Truth sidecar (key,value rows; optional estimands present only when set).
void write_truths_csv(std::ostream& out, const TruthSet& truths);
TruthSet read_truths_csv(std::istream& in);
TruthSet read_truths_csv_file(const std::string& path);

}  // namespace plasmode
