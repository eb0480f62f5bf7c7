#include "plasmode/resample.hpp"

#include <stdexcept>

namespace plasmode {

namespace {

Eigen::Index effective_size(const SourceDataset& source, Eigen::Index replicate_size) {
  const Eigen::Index n = replicate_size > 0 ? replicate_size : source.data.n_rows();
  if (source.data.n_rows() == 0) throw std::invalid_argument("empty source dataset");
  return n;
}

Eigen::VectorXd draw_outcomes(const Dataset& d, const ModelSpec& outcome_model,
                              RngStream& rng) {
  const Eigen::VectorXd m = model_mean(outcome_model, d);
  Eigen::VectorXd y(m.size());
  if (outcome_model.link == Link::logit) {
    for (Eigen::Index i = 0; i < m.size(); ++i) y(i) = rng.next_bernoulli(m(i)) ? 1.0 : 0.0;
  } else {
    const double sd = outcome_model.noise_sd.value_or(0.0);
    for (Eigen::Index i = 0; i < m.size(); ++i) y(i) = m(i) + sd * rng.next_normal();
  }
  return y;
}

}  // namespace

Dataset draw_sample_treatment(const SourceDataset& source, const ModelSpec& outcome_model,
                              RngStream& rng, Eigen::Index replicate_size) {
  const Eigen::Index m = effective_size(source, replicate_size);
  const Eigen::Index src_n = source.data.n_rows();
  Dataset d;
  d.names = source.data.names;
  d.outcome_kind = outcome_model.link == Link::logit ? OutcomeKind::binary
                                                     : OutcomeKind::continuous;
  d.w.resize(m, source.data.w.cols());
  d.a.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto idx = static_cast<Eigen::Index>(rng.next_below(static_cast<std::uint64_t>(src_n)));
    d.w.row(i) = source.data.w.row(idx);
    d.a(i) = source.data.a(idx);
  }
  d.y = draw_outcomes(d, outcome_model, rng);
  return d;
}

Dataset draw_generate_treatment(const SourceDataset& source, const PsModel& ps_model,
                                const ModelSpec& outcome_model, RngStream& rng,
                                Eigen::Index replicate_size) {
  const Eigen::Index m = effective_size(source, replicate_size);
  const Eigen::Index src_n = source.data.n_rows();
  Dataset d;
  d.names = source.data.names;
  d.outcome_kind = outcome_model.link == Link::logit ? OutcomeKind::binary
                                                     : OutcomeKind::continuous;
  d.w.resize(m, source.data.w.cols());
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto idx = static_cast<Eigen::Index>(rng.next_below(static_cast<std::uint64_t>(src_n)));
    d.w.row(i) = source.data.w.row(idx);
  }
  d.a.resize(m);
  if (ps_model.randomized) {
    for (Eigen::Index i = 0; i < m; ++i) d.a(i) = rng.next_bernoulli(ps_model.p) ? 1.0 : 0.0;
  } else {
    const Eigen::VectorXd g = model_mean(ps_model.model, d);
    for (Eigen::Index i = 0; i < m; ++i) d.a(i) = rng.next_bernoulli(g(i)) ? 1.0 : 0.0;
  }
  d.y = draw_outcomes(d, outcome_model, rng);
  return d;
}

}  // namespace plasmode
