#include "plasmode/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

namespace plasmode {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Derived estimands shared by every estimator: ate always, rr only for binary
// outcomes with a usable denominator.
void finish_record(EstimateRecord& r, const Dataset& d) {
  r.ate = r.ey1 - r.ey0;
  if (d.outcome_kind == OutcomeKind::binary && r.ey0 > 0.0) r.rr = r.ey1 / r.ey0;
}

// Weighted unadjusted linear regression of Y on A: the outcome stage shared
// by the weighting estimators. Returns (ey0, ey1) = (intercept, intercept +
// treatment coefficient).
std::pair<double, double> weighted_outcome_on_treatment(const Dataset& d,
                                                        const Eigen::VectorXd& w) {
  FittedGLM fit = fit_linear_weighted(d, {TermSpec::trt()}, w);
  double ey0 = fit.model.intercept;
  double ey1 = fit.model.intercept + fit.model.treatment_coef().value();
  return {ey0, ey1};
}

// Clamp a probability away from {0,1} so its logit stays finite.
double safe_prob(double p) {
  constexpr double eps = 1e-12;
  return std::min(1.0 - eps, std::max(eps, p));
}

}  // namespace

double iptw_weight_cap(Eigen::Index n) {
  return std::sqrt(static_cast<double>(n)) * std::log(static_cast<double>(n)) / 5.0;
}

double tmle_g_bound(Eigen::Index n) {
  return 5.0 / (std::sqrt(static_cast<double>(n)) * std::log(static_cast<double>(n)));
}

StabilizedWeights compute_stabilized_weights(const Eigen::VectorXd& a,
                                             const Eigen::VectorXd& ghat, double cap) {
  if (a.size() != ghat.size()) throw std::invalid_argument("a/ghat size mismatch");
  StabilizedWeights sw;
  sw.p_treated = a.mean();
  sw.w.resize(a.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    double wi = a(i) == 1.0 ? sw.p_treated / ghat(i) : (1.0 - sw.p_treated) / (1.0 - ghat(i));
    if (wi > cap) {
      wi = cap;
      ++sw.n_capped;
    }
    sw.w(i) = wi;
  }
  return sw;
}

const FittedGLM& EstimatorContext::ps_fit() {
  if (!ps_fit_) ps_fit_ = fit_logistic_weighted(d_, d_.a, wm_.ps_design);
  return *ps_fit_;
}

const Eigen::VectorXd& EstimatorContext::ps_hat() {
  if (!ps_hat_) ps_hat_ = predict(ps_fit(), d_);
  return *ps_hat_;
}

const Eigen::VectorXd& EstimatorContext::ps_logit() {
  if (!ps_logit_) ps_logit_ = linear_predictor(ps_fit().model, d_);
  return *ps_logit_;
}

const FittedGLM& EstimatorContext::outcome_fit() {
  if (!outcome_fit_) {
    outcome_fit_ = d_.outcome_kind == OutcomeKind::binary
                       ? fit_logistic_weighted(d_, d_.y, wm_.outcome_design)
                       : fit_linear_weighted(d_, wm_.outcome_design);
  }
  return *outcome_fit_;
}

EstimateRecord estimate_unadj(EstimatorContext& ctx) {
  const Dataset& d = ctx.data();
  double sum1 = 0.0, sum0 = 0.0;
  Eigen::Index n1 = 0, n0 = 0;
  for (Eigen::Index i = 0; i < d.n_rows(); ++i) {
    if (d.a(i) == 1.0) {
      sum1 += d.y(i);
      ++n1;
    } else {
      sum0 += d.y(i);
      ++n0;
    }
  }
  if (n1 == 0 || n0 == 0) throw std::runtime_error("unadj: empty treatment arm");
  EstimateRecord r;
  r.estimator = "unadj";
  r.ey1 = sum1 / static_cast<double>(n1);
  r.ey0 = sum0 / static_cast<double>(n0);
  r.converged = true;
  finish_record(r, d);
  return r;
}

EstimateRecord estimate_match(EstimatorContext& ctx) {
  const Dataset& d = ctx.data();
  const Eigen::Index n = d.n_rows();
  const Eigen::VectorXd& lp = ctx.ps_logit();

  // Arm membership in original row order.
  std::vector<Eigen::Index> treated, control;
  for (Eigen::Index i = 0; i < n; ++i) (d.a(i) == 1.0 ? treated : control).push_back(i);
  if (treated.empty() || control.empty()) throw std::runtime_error("match: empty treatment arm");

  // Distinct logit-PS values of one arm, each carrying the lowest original row
  // index at that value, sorted by value. Nearest-neighbor queries then break
  // distance ties toward the lowest row index deterministically.
  auto value_runs = [&](const std::vector<Eigen::Index>& arm) {
    std::vector<std::pair<double, Eigen::Index>> v;
    v.reserve(arm.size());
    for (Eigen::Index i : arm) v.emplace_back(lp(i), i);
    std::sort(v.begin(), v.end());
    std::vector<std::pair<double, Eigen::Index>> runs;
    for (const auto& pv : v) {
      if (runs.empty() || runs.back().first != pv.first) runs.push_back(pv);
    }
    return runs;
  };
  auto nearest = [](const std::vector<std::pair<double, Eigen::Index>>& runs, double x) {
    auto it = std::lower_bound(runs.begin(), runs.end(), x,
                               [](const auto& run, double q) { return run.first < q; });
    if (it == runs.begin()) return it->second;
    if (it == runs.end()) return std::prev(it)->second;
    const auto& right = *it;
    const auto& left = *std::prev(it);
    double dl = x - left.first, dr = right.first - x;
    if (dl < dr) return left.second;
    if (dr < dl) return right.second;
    return std::min(left.second, right.second);
  };

  const auto treated_runs = value_runs(treated);
  const auto control_runs = value_runs(control);

  // 1-NN with replacement, both directions; count times used as a match.
  Eigen::VectorXd used = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i : treated) used(nearest(control_runs, lp(i))) += 1.0;
  for (Eigen::Index i : control) used(nearest(treated_runs, lp(i))) += 1.0;

  // Unit weight 1 + (times used), rescaled so each arm's weights sum to n.
  Eigen::VectorXd w = Eigen::VectorXd::Ones(n) + used;
  double sum_t = 0.0, sum_c = 0.0;
  for (Eigen::Index i : treated) sum_t += w(i);
  for (Eigen::Index i : control) sum_c += w(i);
  for (Eigen::Index i : treated) w(i) *= static_cast<double>(n) / sum_t;
  for (Eigen::Index i : control) w(i) *= static_cast<double>(n) / sum_c;

  auto [ey0, ey1] = weighted_outcome_on_treatment(d, w);
  EstimateRecord r;
  r.estimator = "match";
  r.ey1 = ey1;
  r.ey0 = ey0;
  r.converged = ctx.ps_fit().converged;
  finish_record(r, d);
  return r;
}

EstimateRecord estimate_iptw(EstimatorContext& ctx) {
  const Dataset& d = ctx.data();
  StabilizedWeights sw =
      compute_stabilized_weights(d.a, ctx.ps_hat(), iptw_weight_cap(d.n_rows()));
  auto [ey0, ey1] = weighted_outcome_on_treatment(d, sw.w);
  EstimateRecord r;
  r.estimator = "iptw";
  r.ey1 = ey1;
  r.ey0 = ey0;
  r.converged = ctx.ps_fit().converged;
  finish_record(r, d);
  return r;
}

EstimateRecord estimate_iptw_ht(EstimatorContext& ctx) {
  const Dataset& d = ctx.data();
  const Eigen::VectorXd& g = ctx.ps_hat();
  const Eigen::Index n = d.n_rows();
  // Plain inverse-weighted means: no stabilization, no cap. This is the exact
  // plug-in form whose Sample-Treatment limit the bias report describes.
  double s1 = 0.0, s0 = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (d.a(i) == 1.0)
      s1 += d.y(i) / g(i);
    else
      s0 += d.y(i) / (1.0 - g(i));
  }
  EstimateRecord r;
  r.estimator = "iptw_ht";
  r.ey1 = s1 / static_cast<double>(n);
  r.ey0 = s0 / static_cast<double>(n);
  r.converged = ctx.ps_fit().converged;
  finish_record(r, d);
  return r;
}

EstimateRecord estimate_tmle(EstimatorContext& ctx, TmleDetail* detail) {
  const Dataset& d = ctx.data();
  const Eigen::Index n = d.n_rows();
  EstimateRecord r;
  r.estimator = "tmle";

  const double lo = d.y.minCoeff(), hi = d.y.maxCoeff();
  if (lo == hi) {
    // Constant outcome: nothing to fluctuate, the plug-in is the constant.
    r.ey1 = r.ey0 = lo;
    r.converged = true;
    finish_record(r, d);
    return r;
  }

  // Bounded-outcome scaling; for binary outcomes the sample range is {0,1}
  // and this is the identity map.
  const Eigen::VectorXd ys = (d.y.array() - lo) / (hi - lo);
  FittedGLM q_fit = fit_logistic_weighted(d, ys, ctx.models().outcome_design);

  const double bound = tmle_g_bound(n);
  const Eigen::VectorXd gb =
      ctx.ps_hat().array().max(bound).min(1.0 - bound).matrix();

  Eigen::VectorXd qa = predict(q_fit, d);
  Eigen::VectorXd q1 = predict(q_fit, d, 1.0);
  Eigen::VectorXd q0 = predict(q_fit, d, 0.0);

  // Clever covariates at the observed arm, and the fluctuation regression of
  // the (scaled) outcome on them with the initial fit as offset.
  Eigen::MatrixXd h(n, 2);
  Eigen::VectorXd offset(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    h(i, 0) = d.a(i) == 1.0 ? 1.0 / gb(i) : 0.0;
    h(i, 1) = d.a(i) == 1.0 ? 0.0 : -1.0 / (1.0 - gb(i));
    offset(i) = logit(safe_prob(qa(i)));
  }
  double eps1 = 0.0, eps0 = 0.0;
  bool fluct_ok = false;
  try {
    RawFit fl = fit_logistic_raw(h, ys, Eigen::VectorXd::Ones(n), offset);
    if (fl.converged) {
      eps1 = fl.beta(0);
      eps0 = fl.beta(1);
      fluct_ok = true;
    }
  } catch (const std::exception&) {
    // fall back to the initial plug-in below, flagged via converged = false
  }

  Eigen::VectorXd q1s(n), q0s(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    q1s(i) = expit(logit(safe_prob(q1(i))) + eps1 / gb(i));
    q0s(i) = expit(logit(safe_prob(q0(i))) - eps0 / (1.0 - gb(i)));
  }

  r.ey1 = lo + (hi - lo) * q1s.mean();
  r.ey0 = lo + (hi - lo) * q0s.mean();
  r.converged = q_fit.converged && ctx.ps_fit().converged && fluct_ok;
  finish_record(r, d);

  if (detail) {
    detail->y_scaled = ys;
    detail->g_bounded = gb;
    detail->h1 = h.col(0);
    detail->h0 = h.col(1);
    detail->q1_star = q1s;
    detail->q0_star = q0s;
    detail->eps1 = eps1;
    detail->eps0 = eps0;
    detail->y_min = lo;
    detail->y_max = hi;
  }
  return r;
}

EstimateRecord estimate_glm_cm(EstimatorContext& ctx) {
  const Dataset& d = ctx.data();
  const FittedGLM& fit = ctx.outcome_fit();
  EstimateRecord r;
  r.estimator = "glm_cm";
  r.ey1 = predict(fit, d, 1.0).mean();
  r.ey0 = predict(fit, d, 0.0).mean();
  r.converged = fit.converged;
  finish_record(r, d);
  return r;
}

EstimateRecord estimate_glm_ps(EstimatorContext& ctx) {
  const Dataset& d = ctx.data();
  const Eigen::Index n = d.n_rows();
  const Eigen::VectorXd& g = ctx.ps_hat();
  // A constant fitted PS (randomized designs) would be collinear with the
  // intercept; drop it and the estimator collapses to the unadjusted fit.
  const bool keep_ps = g.maxCoeff() != g.minCoeff();

  Eigen::MatrixXd x(n, keep_ps ? 3 : 2);
  x.col(0).setOnes();
  x.col(1) = d.a;
  if (keep_ps) x.col(2) = g;

  const bool binary = d.outcome_kind == OutcomeKind::binary;
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
  RawFit fit = binary ? fit_logistic_raw(x, d.y, ones) : fit_linear_raw(x, d.y, ones);

  auto arm_mean = [&](double arm) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      double lp = fit.beta(0) + fit.beta(1) * arm + (keep_ps ? fit.beta(2) * g(i) : 0.0);
      s += binary ? expit(lp) : lp;
    }
    return s / static_cast<double>(n);
  };
  EstimateRecord r;
  r.estimator = "glm_ps";
  r.ey1 = arm_mean(1.0);
  r.ey0 = arm_mean(0.0);
  r.converged = ctx.ps_fit().converged && fit.converged;
  finish_record(r, d);
  return r;
}

EstimateRecord estimate_msm(EstimatorContext& ctx) {
  const Dataset& d = ctx.data();
  const WorkingModels& wm = ctx.models();
  if (!wm.msm_design) throw std::runtime_error("msm: working models carry no msm_design");
  StabilizedWeights sw =
      compute_stabilized_weights(d.a, ctx.ps_hat(), iptw_weight_cap(d.n_rows()));
  FittedGLM fit = fit_logistic_weighted(d, d.y, *wm.msm_design, sw.w);
  auto coef = fit.model.treatment_coef();
  if (!coef) throw std::runtime_error("msm: msm_design has no treatment term");

  EstimateRecord r;
  r.estimator = "msm";
  r.logcor = *coef;
  // Arm means standardized over the replicate's covariates, so the record
  // carries the full estimand set alongside the structural coefficient.
  r.ey1 = model_mean(fit.model, d, 1.0).mean();
  r.ey0 = model_mean(fit.model, d, 0.0).mean();
  r.converged = ctx.ps_fit().converged && fit.converged;
  finish_record(r, d);
  return r;
}

const std::vector<std::string>& known_estimators() {
  static const std::vector<std::string> ids = {"unadj",  "match",  "iptw",   "iptw_ht",
                                               "tmle",   "glm_cm", "glm_ps", "msm"};
  return ids;
}

bool is_known_estimator(const std::string& id) {
  const auto& ids = known_estimators();
  return std::find(ids.begin(), ids.end(), id) != ids.end();
}

EstimateRecord run_estimator(const std::string& id, EstimatorContext& ctx) {
  if (!is_known_estimator(id)) throw std::invalid_argument("unknown estimator id: " + id);
  try {
    if (id == "unadj") return estimate_unadj(ctx);
    if (id == "match") return estimate_match(ctx);
    if (id == "iptw") return estimate_iptw(ctx);
    if (id == "iptw_ht") return estimate_iptw_ht(ctx);
    if (id == "tmle") return estimate_tmle(ctx);
    if (id == "glm_cm") return estimate_glm_cm(ctx);
    if (id == "glm_ps") return estimate_glm_ps(ctx);
    return estimate_msm(ctx);
  } catch (const std::exception&) {
    // One degenerate replicate must not abort a study: emit a non-converged
    // record the metrics stage will drop.
    EstimateRecord r;
    r.estimator = id;
    r.ey1 = r.ey0 = r.ate = kNaN;
    r.converged = false;
    return r;
  }
}

std::vector<EstimateRecord> run_estimators(const Dataset& d, const WorkingModels& wm,
                                           const std::vector<std::string>& ids) {
  EstimatorContext ctx(d, wm);
  std::vector<EstimateRecord> out;
  out.reserve(ids.size());
  for (const auto& id : ids) out.push_back(run_estimator(id, ctx));
  return out;
}

}  // namespace plasmode
