#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

#include "plasmode/dataset.hpp"
#include "plasmode/glm.hpp"
#include "plasmode/model_spec.hpp"

namespace plasmode {

// Working (estimation-side) model designs. Empty ps_design means an
// intercept-only propensity model.
struct WorkingModels {
  std::vector<TermSpec> ps_design;
  std::vector<TermSpec> outcome_design;
  std::optional<std::vector<TermSpec>> msm_design;
};

// Weight cap for inverse-probability weights and the matching truncation
// bound for estimated propensities used by the targeted update.
double iptw_weight_cap(Eigen::Index n);  // sqrt(n) * ln(n) / 5
double tmle_g_bound(Eigen::Index n);     // 5 / (sqrt(n) * ln(n))

struct StabilizedWeights {
  Eigen::VectorXd w;
  double p_treated = 0.0;  // marginal treated fraction used as the stabilizer
  int n_capped = 0;
};

// Stabilized inverse-probability weights: p/g for treated, (1-p)/(1-g) for
// controls, capped above at `cap` (pass +inf for no cap).
StabilizedWeights compute_stabilized_weights(const Eigen::VectorXd& a,
                                             const Eigen::VectorXd& ghat, double cap);

// Shared per-replicate nuisance fits so running several estimators on the
// same replicate does each fit once. Fits are lazy and cached.
class EstimatorContext {
 public:
  EstimatorContext(const Dataset& d, const WorkingModels& wm) : d_(d), wm_(wm) {}
  const Dataset& data() const { return d_; }
  const WorkingModels& models() const { return wm_; }
  const FittedGLM& ps_fit();
  const Eigen::VectorXd& ps_hat();       // probability scale
  const Eigen::VectorXd& ps_logit();     // linear-predictor scale
  const FittedGLM& outcome_fit();        // link chosen by outcome kind

 private:
  const Dataset& d_;
  const WorkingModels& wm_;
  std::optional<FittedGLM> ps_fit_;
  std::optional<Eigen::VectorXd> ps_hat_;
  std::optional<Eigen::VectorXd> ps_logit_;
  std::optional<FittedGLM> outcome_fit_;
};

// Intermediate quantities of the targeted-update estimator, exposed so tests
// can check the score equation it solves.
struct TmleDetail {
  Eigen::VectorXd y_scaled;
  Eigen::VectorXd g_bounded;
  Eigen::VectorXd h1, h0;          // clever covariates at the observed arm
  Eigen::VectorXd q1_star, q0_star;  // updated arm means on the scaled scale
  double eps1 = 0.0, eps0 = 0.0;
  double y_min = 0.0, y_max = 1.0;
};

EstimateRecord estimate_unadj(EstimatorContext& ctx);
EstimateRecord estimate_match(EstimatorContext& ctx);
EstimateRecord estimate_iptw(EstimatorContext& ctx);
// Plain inverse-weighted means (no stabilization, no cap): the estimator form
// the resampling-bias decomposition predicts.
EstimateRecord estimate_iptw_ht(EstimatorContext& ctx);
EstimateRecord estimate_tmle(EstimatorContext& ctx, TmleDetail* detail = nullptr);
EstimateRecord estimate_glm_cm(EstimatorContext& ctx);
EstimateRecord estimate_glm_ps(EstimatorContext& ctx);
EstimateRecord estimate_msm(EstimatorContext& ctx);

const std::vector<std::string>& known_estimators();
bool is_known_estimator(const std::string& id);

// Run the named estimator; any exception becomes a non-converged record with
// NaN values so one bad replicate never aborts a study.
EstimateRecord run_estimator(const std::string& id, EstimatorContext& ctx);
std::vector<EstimateRecord> run_estimators(const Dataset& d, const WorkingModels& wm,
                                           const std::vector<std::string>& ids);

}  // namespace plasmode
