#include "plasmode/glm.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace plasmode {

namespace {

constexpr double kCoefTol = 1e-10;
constexpr double kScoreTol = 1e-8;
constexpr int kMaxIter = 100;
constexpr double kLpDivergence = 30.0;
constexpr double kPivotTol = 1e-10;

void check_weights(const Eigen::VectorXd& w, Eigen::Index n) {
  if (w.size() != n) throw std::invalid_argument("weights length does not match rows");
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(w(i) >= 0.0)) throw std::invalid_argument("weights must be nonnegative");
    total += w(i);
  }
  if (total <= 0.0) throw std::invalid_argument("weights are all zero");
}

void check_rank(const Eigen::MatrixXd& A, Eigen::Index p) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  qr.setThreshold(kPivotTol);
  if (qr.rank() < p) {
    throw std::invalid_argument("design matrix is rank deficient (collinear columns)");
  }
}

// Negative Bernoulli quasi-log-likelihood; clamped so fractional outcomes and
// extreme linear predictors stay finite.
double neg_quasi_loglik(const Eigen::VectorXd& eta, const Eigen::VectorXd& y,
                        const Eigen::VectorXd& w) {
  double out = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    if (w(i) == 0.0) continue;
    // log(1+exp(eta)) - y*eta, computed overflow-safe
    const double e = eta(i);
    const double log1pe = e > 0.0 ? e + std::log1p(std::exp(-e)) : std::log1p(std::exp(e));
    out += w(i) * (log1pe - y(i) * e);
  }
  return out;
}

}  // namespace

RawFit fit_linear_raw(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                      const Eigen::VectorXd& weights) {
  const Eigen::Index n = X.rows(), p = X.cols();
  if (y.size() != n) throw std::invalid_argument("outcome length does not match design rows");
  Eigen::VectorXd w = weights.size() == 0 ? Eigen::VectorXd::Ones(n) : weights;
  check_weights(w, n);

  const Eigen::VectorXd sw = w.cwiseSqrt();
  Eigen::MatrixXd Xw = sw.asDiagonal() * X;
  Eigen::VectorXd yw = sw.cwiseProduct(y);

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Xw);
  qr.setThreshold(kPivotTol);
  if (qr.rank() < p) {
    throw std::invalid_argument("design matrix is rank deficient (collinear columns)");
  }

  RawFit fit;
  fit.beta = qr.solve(yw);
  fit.converged = true;
  fit.iterations = 1;
  const Eigen::VectorXd resid = y - X * fit.beta;
  fit.max_abs_score = (X.transpose() * w.cwiseProduct(resid).matrix()).cwiseAbs().maxCoeff();
  return fit;
}

RawFit fit_logistic_raw(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                        const Eigen::VectorXd& weights, const Eigen::VectorXd& offset) {
  const Eigen::Index n = X.rows(), p = X.cols();
  if (y.size() != n) throw std::invalid_argument("outcome length does not match design rows");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(y(i) >= 0.0 && y(i) <= 1.0)) {
      throw std::invalid_argument("logistic outcome must lie in [0,1]");
    }
  }
  Eigen::VectorXd w = weights.size() == 0 ? Eigen::VectorXd::Ones(n) : weights;
  check_weights(w, n);
  const bool has_offset = offset.size() != 0;
  if (has_offset && offset.size() != n) {
    throw std::invalid_argument("offset length does not match design rows");
  }

  RawFit fit;
  fit.beta = Eigen::VectorXd::Zero(p);

  Eigen::VectorXd eta = has_offset ? offset : Eigen::VectorXd::Zero(n);
  Eigen::VectorXd mu(n), irls_w(n), score(p), delta(p);
  Eigen::MatrixXd XtWX(p, p);
  double objective = neg_quasi_loglik(eta, y, w);
  double prev_step = std::numeric_limits<double>::infinity();
  bool rank_checked = false;

  for (int iter = 1; iter <= kMaxIter; ++iter) {
    fit.iterations = iter;
    for (Eigen::Index i = 0; i < n; ++i) {
      mu(i) = expit(eta(i));
      irls_w(i) = std::max(w(i) * mu(i) * (1.0 - mu(i)), 1e-12);
    }
    score.noalias() = X.transpose() * w.cwiseProduct(y - mu).matrix();
    fit.max_abs_score = score.cwiseAbs().maxCoeff();
    if (fit.max_abs_score < kScoreTol) {
      fit.converged = true;
      return fit;
    }

    if (!rank_checked) {
      // One-time collinearity check on the weighted design.
      check_rank(irls_w.cwiseSqrt().asDiagonal() * X, p);
      rank_checked = true;
    }
    XtWX.noalias() = X.transpose() * irls_w.asDiagonal() * X;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(XtWX);
    delta = ldlt.solve(score);
    if (!delta.allFinite()) {
      fit.diagnostic = "separation";
      return fit;
    }

    // Step halving on deviance increase.
    double lambda = 1.0;
    Eigen::VectorXd beta_new, eta_new;
    double obj_new = std::numeric_limits<double>::infinity();
    bool improved = false;
    for (int h = 0; h < 30; ++h) {
      beta_new = fit.beta + lambda * delta;
      eta_new = X * beta_new;
      if (has_offset) eta_new += offset;
      obj_new = neg_quasi_loglik(eta_new, y, w);
      if (obj_new <= objective) {
        improved = true;
        break;
      }
      lambda *= 0.5;
    }

    const double step = (lambda * delta).cwiseAbs().maxCoeff();
    const double lp_max = eta_new.cwiseAbs().maxCoeff();
    if (lp_max > kLpDivergence && (!improved || step >= prev_step)) {
      // Linear predictor running away with non-shrinking steps: separation.
      fit.diagnostic = "separation";
      return fit;
    }
    if (!improved) {
      // Stuck at numerical noise level; accept current point as converged if
      // the coefficient change criterion is effectively met.
      fit.converged = step < kCoefTol;
      if (!fit.converged) fit.diagnostic = "max_iterations";
      return fit;
    }

    fit.beta = beta_new;
    eta = eta_new;
    objective = obj_new;
    prev_step = step;
    if (step < kCoefTol) {
      for (Eigen::Index i = 0; i < n; ++i) mu(i) = expit(eta(i));
      fit.max_abs_score =
          (X.transpose() * w.cwiseProduct(y - mu).matrix()).cwiseAbs().maxCoeff();
      fit.converged = true;
      return fit;
    }
  }
  fit.diagnostic = "max_iterations";
  return fit;
}

namespace {

FittedGLM to_fitted(const RawFit& raw, const std::vector<TermSpec>& design, Link link) {
  FittedGLM out;
  out.model.link = link;
  out.model.intercept = raw.beta(0);
  out.model.terms.reserve(design.size());
  for (std::size_t k = 0; k < design.size(); ++k) {
    out.model.terms.push_back({design[k], raw.beta(static_cast<Eigen::Index>(k) + 1)});
  }
  out.converged = raw.converged;
  out.iterations = raw.iterations;
  out.max_abs_score = raw.max_abs_score;
  out.diagnostic = raw.diagnostic;
  return out;
}

}  // namespace

FittedGLM fit_linear_weighted(const Dataset& d, const std::vector<TermSpec>& design,
                              const Eigen::VectorXd& weights) {
  const Eigen::MatrixXd X = build_design(d, design);
  return to_fitted(fit_linear_raw(X, d.y, weights), design, Link::identity);
}

FittedGLM fit_logistic_weighted(const Dataset& d, const Eigen::VectorXd& outcome,
                                const std::vector<TermSpec>& design,
                                const Eigen::VectorXd& weights) {
  const Eigen::MatrixXd X = build_design(d, design);
  return to_fitted(fit_logistic_raw(X, outcome, weights), design, Link::logit);
}

Eigen::VectorXd predict(const FittedGLM& fit, const Dataset& d,
                        std::optional<double> treatment_override) {
  return model_mean(fit.model, d, treatment_override);
}

}  // namespace plasmode
