#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "plasmode/csv.hpp"
#include "plasmode/dataset.hpp"
#include "plasmode/model_spec.hpp"
#include "plasmode/rng.hpp"

namespace plasmode {

// How one covariate column is generated. Derived kinds reference an earlier
// column by name, so generator order matters.
struct CovariateGenerator {
  enum class Kind { normal, bernoulli, sum_with_noise, threshold };
  Kind kind = Kind::normal;
  std::string name;
  double mean = 0.0;      // normal
  double sd = 1.0;        // normal
  double p = 0.5;         // bernoulli
  std::string base;       // derived kinds: source column
  double noise_sd = 1.0;  // sum_with_noise: base + N(0, noise_sd)
  double cut = 0.0;       // threshold: 1{base > cut}

  static CovariateGenerator normal(std::string name, double mean, double sd);
  static CovariateGenerator bernoulli(std::string name, double p);
  static CovariateGenerator sum_with_noise(std::string name, std::string base, double noise_sd);
  static CovariateGenerator threshold(std::string name, std::string base, double cut);
};

// Treatment mechanism: a logistic model on covariates, or pure randomization.
struct PsModel {
  bool randomized = false;
  double p = 0.5;     // randomization probability
  ModelSpec model;    // logit link when randomized is false
};

struct ScenarioSpec {
  std::string id;
  std::vector<CovariateGenerator> covariates;
  // Alternative covariate source: resample rows of a real covariate table
  // (with replacement) instead of parametric generation.
  std::optional<CovariateTable> covariate_source;
  PsModel ps;
  ModelSpec outcome;  // includes the treatment term; identity => continuous
  std::optional<std::vector<TermSpec>> msm_design;

  OutcomeKind outcome_kind() const {
    return outcome.link == Link::logit ? OutcomeKind::binary : OutcomeKind::continuous;
  }
  // Working designs for estimation: the correctly specified forms.
  std::vector<TermSpec> ps_design() const;       // empty => intercept-only
  std::vector<TermSpec> outcome_design() const;  // the outcome model's terms
};

// Built-in study designs: s1, s1a, s2, s2a, s3, s4a, s4b ("a" variants of
// s1/s2 are randomized-treatment versions; s4a/s4b differ in the msm design).
// Case-insensitive; throws std::invalid_argument for unknown ids.
ScenarioSpec builtin_scenario(const std::string& id);
std::vector<std::string> builtin_scenario_ids();

// Scenario backed by a real covariate table: rows are bootstrap-resampled and
// the supplied (typically externally fitted) models generate a and y.
ScenarioSpec build_custom_spec(CovariateTable covariates, ModelSpec ps_model,
                               ModelSpec outcome_model,
                               std::optional<std::vector<TermSpec>> msm_design = std::nullopt);

// Covariate block only (n rows), consuming draws column by column.
Dataset generate_covariates(const ScenarioSpec& spec, Eigen::Index n, RngStream& rng);

// Full source: covariates, treatment, outcome, plus truths. Deterministic in
// (spec, n, seed).
SourceDataset generate_source(const ScenarioSpec& spec, Eigen::Index n, std::uint64_t seed);

// Empirical-distribution truths for the realized covariates: ey_a is the mean
// of the true-model outcome mean with treatment fixed to a; rr only for
// binary outcomes.
TruthSet compute_truths(const Dataset& d, const ModelSpec& outcome_model);

// Treatment coefficient of the working msm projected against the true outcome
// model over this dataset's covariates: rows are stacked once per arm with
// fractional outcomes equal to the true means and the msm is fit unweighted.
double stacked_msm_projection(const Dataset& d, const ModelSpec& outcome_model,
                              const std::vector<TermSpec>& msm_design);

// Population-level msm truth: `reps` independent covariate draws of size
// n_big, stacked-projection coefficients averaged over draws. Returns the
// full coefficient vector (intercept first, then msm terms in order).
Eigen::VectorXd compute_msm_truth(const ScenarioSpec& spec, Eigen::Index n_big, int reps,
                                  std::uint64_t seed);

}  // namespace plasmode
