#pragma once

#include <Eigen/Core>

#include "plasmode/dataset.hpp"
#include "plasmode/glm.hpp"
#include "plasmode/model_spec.hpp"

namespace plasmode {

// Closed-form resampling targets for the plain inverse-weighted plug-in when
// treatment labels are carried along by the resampling (the Sample-Treatment
// scheme). Holding the source fixed, the replicate average of that estimator
// converges to iptw_target, while the plasmode truth is psi_n; their gap b_n
// is the scheme's built-in artifact, vanishing only at the root-n rate.
struct BiasReport {
  double psi_n = 0.0;        // (1/n) sum of Q(arm, W_i): the plasmode truth
  double iptw_target = 0.0;  // (1/n) sum over arm rows of Q(arm, W_i)/P(arm|W_i)
  double b_n = 0.0;          // iptw_target - psi_n, via the direct formula
  double scaled = 0.0;       // sqrt(n) * b_n
};

// Vector-level cores (qbar holds Q(arm, W_i) row by row). arm selects which
// counterfactual mean is targeted: 1 weights treated rows by 1/ghat, 0 weights
// control rows by 1/(1-ghat). Throws std::runtime_error when a selected row
// has zero assignment probability for its own arm.
double iptw_resample_target(const Eigen::VectorXd& a, const Eigen::VectorXd& ghat,
                            const Eigen::VectorXd& qbar, int arm = 1);
BiasReport bias_report_arm(const Eigen::VectorXd& a, const Eigen::VectorXd& ghat,
                           const Eigen::VectorXd& qbar, int arm = 1);

// Model-level wrappers on a source dataset: gbar_n is the propensity model
// fitted to the source, qbar the true outcome model (treated-arm mean).
double iptw_sample_treatment_target(const SourceDataset& source, const FittedGLM& gbar_n,
                                    const ModelSpec& qbar);
BiasReport bias_bn(const SourceDataset& source, const FittedGLM& gbar_n,
                   const ModelSpec& qbar);

// Both arms combined into the ATE-scale prediction for the plain
// inverse-weighted difference estimator.
struct AteBiasTargets {
  BiasReport arm1;
  BiasReport arm0;
  double ate_psi = 0.0;     // psi_n(1) - psi_n(0)
  double ate_target = 0.0;  // iptw_target(1) - iptw_target(0)
};
AteBiasTargets ate_bias_targets(const Dataset& d, const FittedGLM& gbar_n,
                                const ModelSpec& qbar);

// The Generate-Treatment analogue (treatment redrawn from gbar_n itself):
// the weight and the draw probability cancel row by row, so the target IS
// psi_n. Computes it the long way, asserts the cancellation to 1e-12
// (std::logic_error otherwise — a bug signal, not a data condition), returns it.
double generate_treatment_target_identity(const SourceDataset& source,
                                          const FittedGLM& gbar_n, const ModelSpec& qbar);

}  // namespace plasmode
