#include "plasmode/oracle.hpp"

#include <cmath>
#include <stdexcept>

namespace plasmode {

namespace {

void check_sizes(const Eigen::VectorXd& a, const Eigen::VectorXd& ghat,
                 const Eigen::VectorXd& qbar) {
  if (a.size() != ghat.size() || a.size() != qbar.size() || a.size() == 0)
    throw std::invalid_argument("bias report inputs must be equal-length and nonempty");
}

}  // namespace

double iptw_resample_target(const Eigen::VectorXd& a, const Eigen::VectorXd& ghat,
                            const Eigen::VectorXd& qbar, int arm) {
  check_sizes(a, ghat, qbar);
  const double arm_v = arm == 1 ? 1.0 : 0.0;
  long double sum = 0.0L;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a(i) != arm_v) continue;
    const double p = arm == 1 ? ghat(i) : 1.0 - ghat(i);
    if (p == 0.0)
      throw std::runtime_error("iptw_resample_target: zero assignment probability on a row of the targeted arm");
    sum += static_cast<long double>(qbar(i)) / p;
  }
  return static_cast<double>(sum / static_cast<long double>(a.size()));
}

BiasReport bias_report_arm(const Eigen::VectorXd& a, const Eigen::VectorXd& ghat,
                           const Eigen::VectorXd& qbar, int arm) {
  check_sizes(a, ghat, qbar);
  const double n = static_cast<double>(a.size());
  BiasReport rep;
  rep.iptw_target = iptw_resample_target(a, ghat, qbar, arm);

  long double psi = 0.0L, b = 0.0L;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    psi += static_cast<long double>(qbar(i));
    // Direct artifact formula: mean of (indicator - probability) * Q / probability
    // for the targeted arm.
    const double ind = arm == 1 ? a(i) : 1.0 - a(i);
    const double p = arm == 1 ? ghat(i) : 1.0 - ghat(i);
    b += static_cast<long double>((ind - p) * qbar(i)) / p;
  }
  rep.psi_n = static_cast<double>(psi / static_cast<long double>(a.size()));
  rep.b_n = static_cast<double>(b / static_cast<long double>(a.size()));
  rep.scaled = std::sqrt(n) * rep.b_n;

  // The two routes to b_n are the same sum term by term; disagreement beyond
  // accumulated rounding means a bug.
  const double gap = std::abs(rep.b_n - (rep.iptw_target - rep.psi_n));
  if (gap > 1e-13 * std::max(1.0, std::abs(rep.psi_n)))
    throw std::logic_error("bias_report_arm: decomposition identity violated");
  return rep;
}

double iptw_sample_treatment_target(const SourceDataset& source, const FittedGLM& gbar_n,
                                    const ModelSpec& qbar) {
  const Eigen::VectorXd ghat = predict(gbar_n, source.data);
  const Eigen::VectorXd q1 = model_mean(qbar, source.data, 1.0);
  return iptw_resample_target(source.data.a, ghat, q1, 1);
}

BiasReport bias_bn(const SourceDataset& source, const FittedGLM& gbar_n,
                   const ModelSpec& qbar) {
  const Eigen::VectorXd ghat = predict(gbar_n, source.data);
  const Eigen::VectorXd q1 = model_mean(qbar, source.data, 1.0);
  return bias_report_arm(source.data.a, ghat, q1, 1);
}

AteBiasTargets ate_bias_targets(const Dataset& d, const FittedGLM& gbar_n,
                                const ModelSpec& qbar) {
  const Eigen::VectorXd ghat = predict(gbar_n, d);
  AteBiasTargets t;
  t.arm1 = bias_report_arm(d.a, ghat, model_mean(qbar, d, 1.0), 1);
  t.arm0 = bias_report_arm(d.a, ghat, model_mean(qbar, d, 0.0), 0);
  t.ate_psi = t.arm1.psi_n - t.arm0.psi_n;
  t.ate_target = t.arm1.iptw_target - t.arm0.iptw_target;
  return t;
}

double generate_treatment_target_identity(const SourceDataset& source,
                                          const FittedGLM& gbar_n, const ModelSpec& qbar) {
  const Eigen::VectorXd ghat = predict(gbar_n, source.data);
  const Eigen::VectorXd q1 = model_mean(qbar, source.data, 1.0);
  const Eigen::Index n = source.data.n_rows();

  long double target = 0.0L, psi = 0.0L;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (ghat(i) == 0.0)
      throw std::runtime_error("generate_treatment_target_identity: zero fitted propensity");
    // Expected weight under redrawn treatment times the inverse weight: the
    // fitted propensity appears in both numerator and denominator.
    target += static_cast<long double>(ghat(i) * q1(i)) / ghat(i);
    psi += static_cast<long double>(q1(i));
  }
  const double tgt = static_cast<double>(target / static_cast<long double>(n));
  const double psi_n = static_cast<double>(psi / static_cast<long double>(n));
  if (std::abs(tgt - psi_n) > 1e-12)
    throw std::logic_error("generate_treatment_target_identity: cancellation failed");
  return tgt;
}

}  // namespace plasmode
