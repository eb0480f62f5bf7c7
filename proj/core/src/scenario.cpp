#include "plasmode/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

#include "plasmode/glm.hpp"

namespace plasmode {

CovariateGenerator CovariateGenerator::normal(std::string name, double mean, double sd) {
  CovariateGenerator g;
  g.kind = Kind::normal;
  g.name = std::move(name);
  g.mean = mean;
  g.sd = sd;
  return g;
}
CovariateGenerator CovariateGenerator::bernoulli(std::string name, double p) {
  CovariateGenerator g;
  g.kind = Kind::bernoulli;
  g.name = std::move(name);
  g.p = p;
  return g;
}
CovariateGenerator CovariateGenerator::sum_with_noise(std::string name, std::string base,
                                                      double noise_sd) {
  CovariateGenerator g;
  g.kind = Kind::sum_with_noise;
  g.name = std::move(name);
  g.base = std::move(base);
  g.noise_sd = noise_sd;
  return g;
}
CovariateGenerator CovariateGenerator::threshold(std::string name, std::string base,
                                                 double cut) {
  CovariateGenerator g;
  g.kind = Kind::threshold;
  g.name = std::move(name);
  g.base = std::move(base);
  g.cut = cut;
  return g;
}

std::vector<TermSpec> ScenarioSpec::ps_design() const {
  if (ps.randomized) return {};
  return ps.model.design();
}

std::vector<TermSpec> ScenarioSpec::outcome_design() const { return outcome.design(); }

namespace {

ModelTerm term(TermSpec t, double coef) { return {std::move(t), coef}; }

// Shared confounder block for scenarios 1-3.
std::vector<CovariateGenerator> three_confounders() {
  return {CovariateGenerator::normal("w1", 0.0, 1.0),
          CovariateGenerator::normal("w2", 0.5, 1.0),
          CovariateGenerator::bernoulli("w3", 0.4)};
}

ModelSpec logistic_model(double intercept, std::vector<ModelTerm> terms) {
  ModelSpec m;
  m.intercept = intercept;
  m.terms = std::move(terms);
  m.link = Link::logit;
  return m;
}

ModelSpec linear_model(double intercept, std::vector<ModelTerm> terms, double noise_sd) {
  ModelSpec m;
  m.intercept = intercept;
  m.terms = std::move(terms);
  m.link = Link::identity;
  m.noise_sd = noise_sd;
  return m;
}

}  // namespace

ScenarioSpec builtin_scenario(const std::string& raw_id) {
  std::string id;
  for (char c : raw_id) id.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));

  ScenarioSpec s;
  s.id = id;

  const ModelSpec ps_confounded =
      logistic_model(-0.48, {term(TermSpec::cov("w1"), 0.96), term(TermSpec::cov("w2"), 0.012),
                             term(TermSpec::cov("w3"), 1.08)});
  const ModelSpec y_continuous =
      linear_model(10.0,
                   {term(TermSpec::trt(), 2.0), term(TermSpec::cov("w1"), 1.0),
                    term(TermSpec::cov("w2"), 0.7), term(TermSpec::cov("w3"), 0.02)},
                   1.0);
  const ModelSpec y_binary =
      logistic_model(-1.8, {term(TermSpec::trt(), 1.1), term(TermSpec::cov("w1"), 0.24),
                            term(TermSpec::cov("w2"), 0.08), term(TermSpec::cov("w3"), 0.8)});

  if (id == "s1" || id == "s1a" || id == "s2" || id == "s2a" || id == "s3") {
    s.covariates = three_confounders();
    if (id == "s1" || id == "s2") {
      s.ps.model = ps_confounded;
    } else if (id == "s3") {
      s.ps.model = logistic_model(-0.72, {term(TermSpec::cov("w1"), -0.72),
                                          term(TermSpec::cov("w2"), 0.18),
                                          term(TermSpec::cov("w3"), 0.81)});
    } else {
      s.ps.randomized = true;
      s.ps.p = 0.5;
    }
    if (id == "s1" || id == "s1a") {
      s.outcome = y_continuous;
    } else if (id == "s3") {
      s.outcome = logistic_model(-4.9, {term(TermSpec::trt(), -2.0),
                                        term(TermSpec::cov("w1"), 0.4),
                                        term(TermSpec::cov("w2"), -4.0),
                                        term(TermSpec::cov("w3"), -3.0)});
    } else {
      s.outcome = y_binary;
    }
    return s;
  }

  if (id == "s4a" || id == "s4b") {
    s.covariates = three_confounders();
    s.covariates.push_back(CovariateGenerator::sum_with_noise("w4", "w3", 1.0));
    s.covariates.push_back(CovariateGenerator::threshold("w5", "w1", 0.2));
    s.ps.model = logistic_model(-0.4, {term(TermSpec::cov("w1"), 0.8),
                                       term(TermSpec::cov("w2"), 0.01),
                                       term(TermSpec::cov("w3"), 0.9)});
    s.outcome = logistic_model(-2.5, {term(TermSpec::trt(), 1.1),
                                      term(TermSpec::cov("w1"), 0.24),
                                      term(TermSpec::cov("w2"), 0.08),
                                      term(TermSpec::cov("w3"), 0.8),
                                      term(TermSpec::cov("w4"), -0.3),
                                      term(TermSpec::cov("w5"), -0.6)});
    if (id == "s4a") {
      // msm equals the true outcome model: estimand is the full design.
      s.msm_design = s.outcome.design();
    } else {
      s.msm_design = std::vector<TermSpec>{TermSpec::trt(), TermSpec::cov("w1"),
                                           TermSpec::cov("w2"), TermSpec::cov("w3")};
    }
    return s;
  }

  throw std::invalid_argument("unknown scenario id: " + raw_id);
}

std::vector<std::string> builtin_scenario_ids() {
  return {"s1", "s1a", "s2", "s2a", "s3", "s4a", "s4b"};
}

ScenarioSpec build_custom_spec(CovariateTable covariates, ModelSpec ps_model,
                               ModelSpec outcome_model,
                               std::optional<std::vector<TermSpec>> msm_design) {
  if (ps_model.link != Link::logit) {
    throw std::invalid_argument("custom propensity model must use the logit link");
  }
  ScenarioSpec s;
  s.id = "custom";
  s.covariate_source = std::move(covariates);
  s.ps.model = std::move(ps_model);
  s.outcome = std::move(outcome_model);
  s.msm_design = std::move(msm_design);
  return s;
}

Dataset generate_covariates(const ScenarioSpec& spec, Eigen::Index n, RngStream& rng) {
  Dataset d;
  if (spec.covariate_source) {
    const auto& src = *spec.covariate_source;
    if (src.w.rows() == 0) throw std::invalid_argument("empty covariate source table");
    d.names = src.names;
    d.w.resize(n, src.w.cols());
    for (Eigen::Index i = 0; i < n; ++i) {
      d.w.row(i) = src.w.row(static_cast<Eigen::Index>(
          rng.next_below(static_cast<std::uint64_t>(src.w.rows()))));
    }
    return d;
  }
  d.w.resize(n, static_cast<Eigen::Index>(spec.covariates.size()));
  d.names.reserve(spec.covariates.size());
  // Derived kinds may only reference columns generated before them.
  auto base_column = [&](const CovariateGenerator& g) {
    for (std::size_t j = 0; j < d.names.size(); ++j) {
      if (d.names[j] == g.base) return static_cast<Eigen::Index>(j);
    }
    throw std::invalid_argument("derived covariate " + g.name + " references unknown base " +
                                g.base);
  };
  for (std::size_t k = 0; k < spec.covariates.size(); ++k) {
    const auto& g = spec.covariates[k];
    const Eigen::Index col = static_cast<Eigen::Index>(k);
    switch (g.kind) {
      case CovariateGenerator::Kind::normal:
        for (Eigen::Index i = 0; i < n; ++i) d.w(i, col) = rng.next_normal(g.mean, g.sd);
        break;
      case CovariateGenerator::Kind::bernoulli:
        for (Eigen::Index i = 0; i < n; ++i) d.w(i, col) = rng.next_bernoulli(g.p) ? 1.0 : 0.0;
        break;
      case CovariateGenerator::Kind::sum_with_noise: {
        const Eigen::Index base = base_column(g);
        for (Eigen::Index i = 0; i < n; ++i) {
          d.w(i, col) = d.w(i, base) + rng.next_normal(0.0, g.noise_sd);
        }
        break;
      }
      case CovariateGenerator::Kind::threshold: {
        const Eigen::Index base = base_column(g);
        for (Eigen::Index i = 0; i < n; ++i) d.w(i, col) = d.w(i, base) > g.cut ? 1.0 : 0.0;
        break;
      }
    }
    d.names.push_back(g.name);
  }
  return d;
}

namespace {

Eigen::VectorXd draw_treatment(const Dataset& d, const PsModel& ps, RngStream& rng) {
  const Eigen::Index n = d.n_rows();
  Eigen::VectorXd a(n);
  if (ps.randomized) {
    for (Eigen::Index i = 0; i < n; ++i) a(i) = rng.next_bernoulli(ps.p) ? 1.0 : 0.0;
  } else {
    const Eigen::VectorXd g = model_mean(ps.model, d);
    for (Eigen::Index i = 0; i < n; ++i) a(i) = rng.next_bernoulli(g(i)) ? 1.0 : 0.0;
  }
  return a;
}

Eigen::VectorXd draw_outcome(const Dataset& d, const ModelSpec& outcome, RngStream& rng) {
  const Eigen::Index n = d.n_rows();
  const Eigen::VectorXd m = model_mean(outcome, d);
  Eigen::VectorXd y(n);
  if (outcome.link == Link::logit) {
    for (Eigen::Index i = 0; i < n; ++i) y(i) = rng.next_bernoulli(m(i)) ? 1.0 : 0.0;
  } else {
    const double sd = outcome.noise_sd.value_or(0.0);
    // Always consume a draw per row so the stream layout does not depend on
    // the noise parameter.
    for (Eigen::Index i = 0; i < n; ++i) y(i) = m(i) + sd * rng.next_normal();
  }
  return y;
}

}  // namespace

SourceDataset generate_source(const ScenarioSpec& spec, Eigen::Index n, std::uint64_t seed) {
  RngStream rng(seed, "source", 0);
  SourceDataset out;
  out.data = generate_covariates(spec, n, rng);
  out.data.a = draw_treatment(out.data, spec.ps, rng);
  out.data.outcome_kind = spec.outcome_kind();
  out.data.y = draw_outcome(out.data, spec.outcome, rng);
  out.scenario_id = spec.id;
  out.seed = seed;
  out.truths = compute_truths(out.data, spec.outcome);
  if (spec.msm_design) {
    out.truths.logcor = stacked_msm_projection(out.data, spec.outcome, *spec.msm_design);
  }
  return out;
}

TruthSet compute_truths(const Dataset& d, const ModelSpec& outcome_model) {
  const Eigen::VectorXd q1 = model_mean(outcome_model, d, 1.0);
  const Eigen::VectorXd q0 = model_mean(outcome_model, d, 0.0);
  long double s1 = 0.0L, s0 = 0.0L;
  for (Eigen::Index i = 0; i < q1.size(); ++i) {
    s1 += q1(i);
    s0 += q0(i);
  }
  TruthSet t;
  const auto n = static_cast<long double>(q1.size());
  t.ey1 = static_cast<double>(s1 / n);
  t.ey0 = static_cast<double>(s0 / n);
  t.ate = static_cast<double>((s1 - s0) / n);
  if (outcome_model.link == Link::logit && t.ey0 > 0.0) t.rr = t.ey1 / t.ey0;
  return t;
}

double stacked_msm_projection(const Dataset& d, const ModelSpec& outcome_model,
                              const std::vector<TermSpec>& msm_design) {
  const Eigen::Index n = d.n_rows();
  const Eigen::MatrixXd X0 = build_design(d, msm_design, 0.0);
  const Eigen::MatrixXd X1 = build_design(d, msm_design, 1.0);
  Eigen::MatrixXd X(2 * n, X0.cols());
  X.topRows(n) = X0;
  X.bottomRows(n) = X1;
  Eigen::VectorXd y(2 * n);
  y.head(n) = model_mean(outcome_model, d, 0.0);
  y.tail(n) = model_mean(outcome_model, d, 1.0);
  const RawFit fit = fit_logistic_raw(X, y, Eigen::VectorXd());
  if (!fit.converged) {
    throw std::runtime_error("stacked msm projection did not converge");
  }
  for (std::size_t k = 0; k < msm_design.size(); ++k) {
    if (msm_design[k].is_treatment()) return fit.beta(static_cast<Eigen::Index>(k) + 1);
  }
  throw std::invalid_argument("msm design has no treatment term");
}

Eigen::VectorXd compute_msm_truth(const ScenarioSpec& spec, Eigen::Index n_big, int reps,
                                  std::uint64_t seed) {
  if (!spec.msm_design) throw std::invalid_argument("scenario has no msm design");
  const auto& design = *spec.msm_design;
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(design.size()) + 1);
  for (int rep = 0; rep < reps; ++rep) {
    RngStream rng(seed, "msm-truth", static_cast<std::uint64_t>(rep));
    const Dataset d = generate_covariates(spec, n_big, rng);
    const Eigen::MatrixXd X0 = build_design(d, design, 0.0);
    const Eigen::MatrixXd X1 = build_design(d, design, 1.0);
    Eigen::MatrixXd X(2 * n_big, X0.cols());
    X.topRows(n_big) = X0;
    X.bottomRows(n_big) = X1;
    Eigen::VectorXd y(2 * n_big);
    y.head(n_big) = model_mean(spec.outcome, d, 0.0);
    y.tail(n_big) = model_mean(spec.outcome, d, 1.0);
    const RawFit fit = fit_logistic_raw(X, y, Eigen::VectorXd());
    if (!fit.converged) throw std::runtime_error("msm truth fit did not converge");
    acc += fit.beta;
  }
  return acc / static_cast<double>(reps);
}

}  // namespace plasmode
