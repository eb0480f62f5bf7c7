#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "plasmode/dataset.hpp"
#include "plasmode/model_spec.hpp"

namespace plasmode {

// Result of a (possibly weighted) GLM fit. `model` carries the fitted
// coefficients on the term list that was requested, so it can be fed straight
// back into prediction or used as a generative model.
struct FittedGLM {
  ModelSpec model;
  bool converged = false;
  int iterations = 0;
  double max_abs_score = 0.0;  // max |X' W (y - mu)| at the returned solution
  std::string diagnostic;      // "", "separation", "max_iterations"
};

// Low-level fits on an explicit design matrix (no implicit intercept). Used
// internally and by targeted-update steps that need offsets.
struct RawFit {
  Eigen::VectorXd beta;
  bool converged = false;
  int iterations = 0;
  double max_abs_score = 0.0;
  std::string diagnostic;
};

// Weighted least squares via column-pivoted QR of sqrt(w)X (relative pivot
// tolerance 1e-10 flags collinear designs). Throws std::invalid_argument on
// rank deficiency, negative weights, all-zero weights, or size mismatches.
RawFit fit_linear_raw(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                      const Eigen::VectorXd& weights);

// Bernoulli quasi-likelihood IRLS with optional per-row offset. Outcomes may
// be fractional in [0,1]. Starts at beta = 0; stops when the max absolute
// coefficient change is < 1e-10 or the max absolute score is < 1e-8; halves
// steps that fail to decrease the deviance; caps at 100 iterations. Divergence
// under separation (|linear predictor| > 30 with non-shrinking steps) returns
// a non-converged fit with diagnostic "separation" instead of looping.
RawFit fit_logistic_raw(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                        const Eigen::VectorXd& weights,
                        const Eigen::VectorXd& offset = Eigen::VectorXd());

// Spec'd model-level fits: intercept + design terms evaluated on the dataset.
// Pass an empty weights vector for uniform weights.
FittedGLM fit_linear_weighted(const Dataset& d, const std::vector<TermSpec>& design,
                              const Eigen::VectorXd& weights = Eigen::VectorXd());
// The outcome argument makes the same routine serve outcome models (y),
// propensity models (a) and stacked fractional-outcome projections.
FittedGLM fit_logistic_weighted(const Dataset& d, const Eigen::VectorXd& outcome,
                                const std::vector<TermSpec>& design,
                                const Eigen::VectorXd& weights = Eigen::VectorXd());

// Response-scale predictions; treatment_override fixes the treatment column
// to an arm without touching the dataset.
Eigen::VectorXd predict(const FittedGLM& fit, const Dataset& d,
                        std::optional<double> treatment_override = std::nullopt);

}  // namespace plasmode
