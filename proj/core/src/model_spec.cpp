#include "plasmode/model_spec.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

namespace plasmode {

double logit(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("logit argument outside (0,1)");
  return std::log(p / (1.0 - p));
}

TermSpec TermSpec::cov(std::string n) {
  TermSpec t;
  t.kind = Kind::covariate;
  t.name = std::move(n);
  return t;
}
TermSpec TermSpec::trt() {
  TermSpec t;
  t.kind = Kind::treatment;
  return t;
}
TermSpec TermSpec::prod(std::string n1, std::string n2) {
  TermSpec t;
  t.kind = Kind::product;
  t.name = std::move(n1);
  t.name2 = std::move(n2);
  return t;
}
TermSpec TermSpec::sq(std::string n) {
  TermSpec t;
  t.kind = Kind::square;
  t.name = std::move(n);
  return t;
}
TermSpec TermSpec::thresh(std::string n, double cut) {
  TermSpec t;
  t.kind = Kind::threshold;
  t.name = std::move(n);
  t.cut = cut;
  return t;
}

std::string TermSpec::label() const {
  switch (kind) {
    case Kind::covariate: return name;
    case Kind::treatment: return "a";
    case Kind::product: return name + "*" + name2;
    case Kind::square: return name + "^2";
    case Kind::threshold: {
      // Shortest representation that parses back to the same double, so term
      // strings round-trip through configs exactly.
      char buf[32];
      auto res = std::to_chars(buf, buf + sizeof(buf), cut);
      return "I(" + name + ">" + std::string(buf, res.ptr) + ")";
    }
  }
  return "?";
}

std::vector<TermSpec> ModelSpec::design() const {
  std::vector<TermSpec> out;
  out.reserve(terms.size());
  for (const auto& t : terms) out.push_back(t.term);
  return out;
}

std::optional<double> ModelSpec::treatment_coef() const {
  for (const auto& t : terms) {
    if (t.term.is_treatment()) return t.coef;
  }
  return std::nullopt;
}

namespace {

// Term-column filler with column lookups resolved once per call.
struct ResolvedTerm {
  TermSpec::Kind kind;
  Eigen::Index c1 = -1;
  Eigen::Index c2 = -1;
  double cut = 0.0;
};

ResolvedTerm resolve(const TermSpec& t, const Dataset& d) {
  ResolvedTerm r;
  r.kind = t.kind;
  r.cut = t.cut;
  switch (t.kind) {
    case TermSpec::Kind::treatment:
      break;
    case TermSpec::Kind::product:
      r.c1 = d.column(t.name);
      r.c2 = d.column(t.name2);
      break;
    default:
      r.c1 = d.column(t.name);
  }
  return r;
}

void fill_column(const ResolvedTerm& r, const Dataset& d,
                 std::optional<double> a_override, Eigen::Ref<Eigen::VectorXd> col) {
  const Eigen::Index n = d.n_rows();
  switch (r.kind) {
    case TermSpec::Kind::covariate:
      col = d.w.col(r.c1);
      break;
    case TermSpec::Kind::treatment:
      if (a_override) {
        col.setConstant(*a_override);
      } else {
        if (d.a.size() != n) throw std::invalid_argument("treatment term needs a treatment column");
        col = d.a;
      }
      break;
    case TermSpec::Kind::product:
      col = d.w.col(r.c1).cwiseProduct(d.w.col(r.c2));
      break;
    case TermSpec::Kind::square:
      col = d.w.col(r.c1).cwiseProduct(d.w.col(r.c1));
      break;
    case TermSpec::Kind::threshold:
      for (Eigen::Index i = 0; i < n; ++i) col(i) = d.w(i, r.c1) > r.cut ? 1.0 : 0.0;
      break;
  }
}

}  // namespace

Eigen::MatrixXd build_design(const Dataset& d, const std::vector<TermSpec>& terms,
                             std::optional<double> treatment_override) {
  const Eigen::Index n = d.n_rows();
  Eigen::MatrixXd X(n, static_cast<Eigen::Index>(terms.size()) + 1);
  X.col(0).setOnes();
  for (std::size_t k = 0; k < terms.size(); ++k) {
    fill_column(resolve(terms[k], d), d, treatment_override,
                X.col(static_cast<Eigen::Index>(k) + 1));
  }
  return X;
}

Eigen::VectorXd linear_predictor(const ModelSpec& m, const Dataset& d,
                                 std::optional<double> treatment_override) {
  const Eigen::Index n = d.n_rows();
  Eigen::VectorXd lp = Eigen::VectorXd::Constant(n, m.intercept);
  Eigen::VectorXd col(n);
  for (const auto& t : m.terms) {
    fill_column(resolve(t.term, d), d, treatment_override, col);
    lp.noalias() += t.coef * col;
  }
  return lp;
}

Eigen::VectorXd model_mean(const ModelSpec& m, const Dataset& d,
                           std::optional<double> treatment_override) {
  Eigen::VectorXd lp = linear_predictor(m, d, treatment_override);
  if (m.link == Link::logit) {
    for (Eigen::Index i = 0; i < lp.size(); ++i) lp(i) = expit(lp(i));
  }
  return lp;
}

}  // namespace plasmode
