#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

#include "plasmode/dataset.hpp"

namespace plasmode {

enum class Link { identity, logit };

inline double expit(double x) { return 1.0 / (1.0 + std::exp(-x)); }
double logit(double p);  // throws outside (0,1)

// One design column (beyond the implicit intercept): a named covariate, the
// treatment indicator, a product of two covariates, a squared covariate, or a
// threshold indicator 1{w > cut}.
struct TermSpec {
  enum class Kind { covariate, treatment, product, square, threshold };
  Kind kind = Kind::covariate;
  std::string name;    // covariate / square / threshold / first product factor
  std::string name2;   // second product factor
  double cut = 0.0;    // threshold cut point

  static TermSpec cov(std::string n);
  static TermSpec trt();
  static TermSpec prod(std::string n1, std::string n2);
  static TermSpec sq(std::string n);
  static TermSpec thresh(std::string n, double cut);

  bool is_treatment() const { return kind == Kind::treatment; }
  std::string label() const;  // e.g. "w1", "a", "w1*w2", "w1^2", "I(w1>0.2)"
  bool operator==(const TermSpec&) const = default;
};

struct ModelTerm {
  TermSpec term;
  double coef = 0.0;
};

// A linear model on the given link scale: intercept + sum coef_k * term_k.
// Generative identity-link models may carry Gaussian noise.
struct ModelSpec {
  double intercept = 0.0;
  std::vector<ModelTerm> terms;
  Link link = Link::identity;
  std::optional<double> noise_sd;

  std::vector<TermSpec> design() const;
  // Fitted/true coefficient attached to the treatment term; nullopt when the
  // model has no treatment term.
  std::optional<double> treatment_coef() const;
};

// Dense design matrix [1 | term columns] for the dataset, with the treatment
// column optionally overridden to a fixed arm.
Eigen::MatrixXd build_design(const Dataset& d, const std::vector<TermSpec>& terms,
                             std::optional<double> treatment_override = std::nullopt);

// Linear predictor of a model on a dataset (no link applied).
Eigen::VectorXd linear_predictor(const ModelSpec& m, const Dataset& d,
                                 std::optional<double> treatment_override = std::nullopt);

// Model mean on the response scale (identity: lp; logit: expit(lp)).
Eigen::VectorXd model_mean(const ModelSpec& m, const Dataset& d,
                           std::optional<double> treatment_override = std::nullopt);

}  // namespace plasmode
