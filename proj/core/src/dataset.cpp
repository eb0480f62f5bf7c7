#include "plasmode/dataset.hpp"

#include <cmath>
#include <stdexcept>

namespace plasmode {

std::string framework_name(Framework fw) {
  return fw == Framework::sample_treatment ? "sample_treatment" : "generate_treatment";
}

std::optional<Framework> framework_from_name(const std::string& name) {
  if (name == "sample_treatment") return Framework::sample_treatment;
  if (name == "generate_treatment") return Framework::generate_treatment;
  return std::nullopt;
}

Eigen::Index Dataset::column(const std::string& name) const {
  for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(names.size()); ++j) {
    if (names[static_cast<std::size_t>(j)] == name) return j;
  }
  throw std::invalid_argument("unknown covariate: " + name);
}

std::optional<double> TruthSet::value(const std::string& estimand) const {
  if (estimand == "ey1") return ey1;
  if (estimand == "ey0") return ey0;
  if (estimand == "ate") return ate;
  if (estimand == "rr") return rr;
  if (estimand == "logcor") return logcor;
  return std::nullopt;
}

std::optional<double> EstimateRecord::value(const std::string& estimand) const {
  if (estimand == "ey1") return ey1;
  if (estimand == "ey0") return ey0;
  if (estimand == "ate") return ate;
  if (estimand == "rr") return rr;
  if (estimand == "logcor") return logcor;
  return std::nullopt;
}

std::vector<Violation> validate_dataset(const Dataset& d) {
  std::vector<Violation> out;
  const Eigen::Index n = d.w.rows();
  if (d.names.size() != static_cast<std::size_t>(d.w.cols())) {
    out.push_back({"shape", -1, "covariate name count does not match column count"});
  }
  if (d.a.size() != n) {
    out.push_back({"shape", -1, "treatment length does not match covariate rows"});
  }
  if (d.y.size() != n) {
    out.push_back({"shape", -1, "outcome length does not match covariate rows"});
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d.w.cols(); ++j) {
      if (!std::isfinite(d.w(i, j))) {
        out.push_back({"w", static_cast<long>(i),
                       "non-finite covariate in column " +
                           (static_cast<std::size_t>(j) < d.names.size()
                                ? d.names[static_cast<std::size_t>(j)]
                                : std::to_string(j))});
        break;  // one violation per row is enough to localize it
      }
    }
  }
  for (Eigen::Index i = 0; i < d.a.size() && i < n; ++i) {
    const double a = d.a(i);
    if (!(a == 0.0 || a == 1.0)) {
      out.push_back({"a", static_cast<long>(i), "treatment must be exactly 0 or 1"});
    }
  }
  for (Eigen::Index i = 0; i < d.y.size() && i < n; ++i) {
    const double y = d.y(i);
    if (!std::isfinite(y)) {
      out.push_back({"y", static_cast<long>(i), "non-finite outcome"});
    } else if (d.outcome_kind == OutcomeKind::binary && !(y == 0.0 || y == 1.0)) {
      out.push_back({"y", static_cast<long>(i), "binary outcome must be exactly 0 or 1"});
    }
  }
  return out;
}

}  // namespace plasmode
