#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace plasmode {

enum class OutcomeKind { continuous, binary };

enum class Framework { sample_treatment, generate_treatment };

std::string framework_name(Framework fw);
std::optional<Framework> framework_from_name(const std::string& name);

// One analysis-ready rectangle: covariate matrix with named columns, a binary
// treatment column and an outcome column.
struct Dataset {
  Eigen::MatrixXd w;                // n x p covariates
  std::vector<std::string> names;   // p column names
  Eigen::VectorXd a;                // treatment, each entry 0.0 or 1.0
  Eigen::VectorXd y;                // outcome
  OutcomeKind outcome_kind = OutcomeKind::continuous;

  Eigen::Index n_rows() const { return w.rows(); }
  Eigen::Index n_covariates() const { return w.cols(); }

  // Column index for a named covariate; throws std::invalid_argument if the
  // name is unknown.
  Eigen::Index column(const std::string& name) const;
};

// Scenario truths evaluated on a concrete source (empirical-distribution
// estimands, so they depend on the realized covariate draw).
struct TruthSet {
  double ey1 = 0.0;
  double ey0 = 0.0;
  double ate = 0.0;
  std::optional<double> rr;      // binary outcomes only
  std::optional<double> logcor;  // scenarios with a marginal structural model

  std::optional<double> value(const std::string& estimand) const;
};

// A generated source dataset together with its provenance and truths.
struct SourceDataset {
  Dataset data;
  std::string scenario_id;
  std::uint64_t seed = 0;
  TruthSet truths;
};

// One estimator applied to one simulated replicate.
struct EstimateRecord {
  int replicate = 0;
  std::string estimator;
  Framework framework = Framework::sample_treatment;
  double ey1 = 0.0;
  double ey0 = 0.0;
  double ate = 0.0;
  std::optional<double> rr;
  std::optional<double> logcor;
  bool converged = false;

  std::optional<double> value(const std::string& estimand) const;
};

struct Violation {
  std::string field;       // "a", "y", "w", "shape"
  long row = -1;           // -1 when not row-specific
  std::string message;
};

// Structural checks: consistent lengths, finite entries, binary treatment,
// and {0,1} outcomes when the outcome kind is binary. Returns all violations
// found (empty means valid).
std::vector<Violation> validate_dataset(const Dataset& d);

}  // namespace plasmode
