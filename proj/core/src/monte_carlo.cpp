#include "plasmode/monte_carlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "plasmode/glm.hpp"

namespace plasmode {

namespace {

// Generation-side outcome model: either the scenario's own, or a refit on the
// source. A refit identity-link model needs a noise scale; the residual sd
// (denominator n - p) stands in for the true one.
ModelSpec resolve_outcome_model(const MonteCarloConfig& cfg, const SourceDataset& source) {
  if (cfg.plasmode.outcome_for_generation == GenerationModelSource::true_model)
    return cfg.scenario.outcome;
  const Dataset& d = source.data;
  FittedGLM fit = d.outcome_kind == OutcomeKind::binary
                      ? fit_logistic_weighted(d, d.y, cfg.scenario.outcome_design())
                      : fit_linear_weighted(d, cfg.scenario.outcome_design());
  if (!fit.converged)
    throw std::runtime_error("run_monte_carlo: generation outcome refit did not converge");
  ModelSpec m = fit.model;
  if (m.link == Link::identity) {
    const Eigen::VectorXd resid = d.y - predict(fit, d);
    const double dof = static_cast<double>(d.n_rows()) -
                       static_cast<double>(cfg.scenario.outcome_design().size() + 1);
    if (dof <= 0.0)
      throw std::runtime_error("run_monte_carlo: no residual degrees of freedom for noise scale");
    m.noise_sd = std::sqrt(resid.squaredNorm() / dof);
  }
  return m;
}

PsModel resolve_ps_model(const MonteCarloConfig& cfg, const SourceDataset& source) {
  if (cfg.plasmode.ps_for_generation == GenerationModelSource::true_model)
    return cfg.scenario.ps;
  const Dataset& d = source.data;
  FittedGLM fit = fit_logistic_weighted(d, d.a, cfg.scenario.ps_design());
  if (!fit.converged)
    throw std::runtime_error("run_monte_carlo: generation propensity refit did not converge");
  PsModel ps;
  ps.randomized = false;
  ps.model = fit.model;
  return ps;
}

const char* replicate_stream_tag(Framework fw) {
  return fw == Framework::sample_treatment ? "replicate-st" : "replicate-gt";
}

// Type-7 (linear interpolation) quantile of an ascending vector.
double quantile_sorted(const std::vector<double>& v, double p) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double h = (static_cast<double>(v.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(h);
  if (static_cast<double>(lo) == h || lo + 1 >= v.size()) return v[lo];
  return v[lo] + (h - static_cast<double>(lo)) * (v[lo + 1] - v[lo]);
}

}  // namespace

MonteCarloResult run_monte_carlo(const MonteCarloConfig& cfg) {
  if (cfg.replicates < 1) throw std::invalid_argument("run_monte_carlo: replicates must be >= 1");
  if (cfg.n < 1) throw std::invalid_argument("run_monte_carlo: n must be >= 1");
  if (cfg.estimators.empty())
    throw std::invalid_argument("run_monte_carlo: no estimators requested");
  for (const auto& id : cfg.estimators)
    if (!is_known_estimator(id))
      throw std::invalid_argument("run_monte_carlo: unknown estimator id: " + id);

  std::vector<Framework> frameworks = cfg.frameworks;
  if (frameworks.empty())
    frameworks = {Framework::sample_treatment, Framework::generate_treatment};

  MonteCarloResult out;
  out.source = generate_source(cfg.scenario, cfg.n, cfg.master_seed);
  out.working_models.ps_design = cfg.scenario.ps_design();
  out.working_models.outcome_design = cfg.scenario.outcome_design();
  out.working_models.msm_design = cfg.scenario.msm_design;

  const ModelSpec outcome_gen = resolve_outcome_model(cfg, out.source);
  const bool needs_ps = std::any_of(frameworks.begin(), frameworks.end(), [](Framework f) {
    return f == Framework::generate_treatment;
  });
  const PsModel ps_gen = needs_ps ? resolve_ps_model(cfg, out.source) : PsModel{};

  const int R = cfg.replicates;
  const auto E = static_cast<int>(cfg.estimators.size());
  const auto F = static_cast<int>(frameworks.size());
  out.records.resize(static_cast<std::size_t>(F) * R * E);

  // Work items are (framework, replicate) pairs claimed off an atomic
  // counter; every record lands in its canonical slot, so the table is
  // identical for any worker count.
  std::atomic<int> next_task{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;

  auto run_tasks = [&]() {
    while (true) {
      const int task = next_task.fetch_add(1);
      if (task >= F * R) break;
      const int fi = task / R;
      const int r = task % R;
      const Framework fw = frameworks[fi];
      try {
        RngStream rng(cfg.master_seed, replicate_stream_tag(fw), static_cast<std::uint64_t>(r));
        Dataset d = fw == Framework::sample_treatment
                        ? draw_sample_treatment(out.source, outcome_gen, rng,
                                                cfg.plasmode.replicate_size)
                        : draw_generate_treatment(out.source, ps_gen, outcome_gen, rng,
                                                  cfg.plasmode.replicate_size);
        std::vector<EstimateRecord> recs =
            run_estimators(d, out.working_models, cfg.estimators);
        for (int ei = 0; ei < E; ++ei) {
          recs[ei].replicate = r;
          recs[ei].framework = fw;
          out.records[static_cast<std::size_t>(fi) * R * E + static_cast<std::size_t>(r) * E +
                      ei] = std::move(recs[ei]);
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };

  int workers = cfg.workers == 0
                    ? std::max(1, static_cast<int>(std::thread::hardware_concurrency()))
                    : cfg.workers;
  workers = std::min(workers, F * R);
  if (workers <= 1) {
    run_tasks();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int i = 0; i < workers; ++i) pool.emplace_back(run_tasks);
    for (auto& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);
  return out;
}

std::vector<MetricsSummary> summarize(const std::vector<EstimateRecord>& records,
                                      const TruthSet& truths, const std::string& estimand) {
  const std::optional<double> truth = truths.value(estimand);
  if (!truth)
    throw std::invalid_argument("summarize: truth set has no value for estimand: " + estimand);
  const double theta = *truth;

  struct Cell {
    std::string estimator;
    Framework framework;
    std::vector<double> vals;
    long total = 0;
  };
  std::vector<Cell> cells;
  for (const auto& rec : records) {
    auto it = std::find_if(cells.begin(), cells.end(), [&](const Cell& c) {
      return c.estimator == rec.estimator && c.framework == rec.framework;
    });
    if (it == cells.end()) {
      cells.push_back(Cell{rec.estimator, rec.framework, {}, 0});
      it = std::prev(cells.end());
    }
    ++it->total;
    if (!rec.converged) continue;
    const std::optional<double> v = rec.value(estimand);
    if (!v || !std::isfinite(*v)) continue;
    it->vals.push_back(*v);
  }

  std::vector<MetricsSummary> out;
  for (const Cell& c : cells) {
    const auto R = static_cast<long>(c.vals.size());
    if (R < 2) continue;
    long double sum = 0.0L;
    for (double v : c.vals) sum += v;
    const double mean = static_cast<double>(sum / static_cast<long double>(R));
    long double ss_mean = 0.0L, ss_truth = 0.0L;
    for (double v : c.vals) {
      ss_mean += static_cast<long double>(v - mean) * (v - mean);
      ss_truth += static_cast<long double>(v - theta) * (v - theta);
    }
    MetricsSummary m;
    m.estimator = c.estimator;
    m.framework = c.framework;
    m.estimand = estimand;
    m.truth = theta;
    m.bias = mean - theta;
    if (theta != 0.0) m.pct_bias = 100.0 * m.bias / theta;
    m.se = std::sqrt(static_cast<double>(ss_mean / static_cast<long double>(R - 1)));
    m.rmse = std::sqrt(static_cast<double>(ss_truth / static_cast<long double>(R)));
    if (m.se == 0.0)
      m.bias_se = m.bias == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    else
      m.bias_se = std::abs(m.bias) / m.se;
    long covered = 0;
    const double half_width = 1.96 * m.se;
    for (double v : c.vals)
      if (std::abs(v - theta) <= half_width) ++covered;
    m.coverage = 100.0 * static_cast<double>(covered) / static_cast<double>(R);
    m.n_replicates = c.total;
    m.n_converged = R;
    out.push_back(std::move(m));
  }
  return out;
}

std::vector<MetricsSummary> summarize_all(const std::vector<EstimateRecord>& records,
                                          const TruthSet& truths,
                                          const std::vector<std::string>& estimands) {
  std::vector<MetricsSummary> out;
  for (const auto& e : estimands) {
    auto part = summarize(records, truths, e);
    out.insert(out.end(), std::make_move_iterator(part.begin()),
               std::make_move_iterator(part.end()));
  }
  return out;
}

std::uint64_t source_seed_for(std::uint64_t master_seed, int source_index) {
  RngStream s(master_seed, "source-seed", static_cast<std::uint64_t>(source_index));
  return s.next_u64();
}

MultiSourceResult multi_source_study(
    const MonteCarloConfig& base, int n_sources, const std::vector<std::string>& estimands,
    const std::function<void(int, const MonteCarloResult&)>& on_source) {
  if (n_sources < 2) throw std::invalid_argument("multi_source_study: n_sources must be >= 2");
  MultiSourceResult out;
  out.per_source.reserve(static_cast<std::size_t>(n_sources));
  for (int k = 0; k < n_sources; ++k) {
    MonteCarloConfig cfg = base;
    cfg.master_seed = source_seed_for(base.master_seed, k);
    MonteCarloResult res = run_monte_carlo(cfg);
    SourceRunSummary s;
    s.source_seed = cfg.master_seed;
    s.truths = res.source.truths;
    s.metrics = summarize_all(res.records, res.source.truths, estimands);
    out.per_source.push_back(std::move(s));
    if (on_source) on_source(k, res);
  }

  // Collect each cell's bias:SE across sources, in first-appearance order.
  struct Agg {
    std::string estimator;
    Framework framework;
    std::string estimand;
    std::vector<double> ratios;
  };
  std::vector<Agg> aggs;
  for (const auto& s : out.per_source) {
    for (const auto& m : s.metrics) {
      auto it = std::find_if(aggs.begin(), aggs.end(), [&](const Agg& a) {
        return a.estimator == m.estimator && a.framework == m.framework &&
               a.estimand == m.estimand;
      });
      if (it == aggs.end()) {
        aggs.push_back(Agg{m.estimator, m.framework, m.estimand, {}});
        it = std::prev(aggs.end());
      }
      it->ratios.push_back(m.bias_se);
    }
  }
  for (auto& a : aggs) {
    std::sort(a.ratios.begin(), a.ratios.end());
    CrossSourceStat st;
    st.estimator = a.estimator;
    st.framework = a.framework;
    st.estimand = a.estimand;
    st.n_sources = static_cast<int>(a.ratios.size());
    st.median_bias_se = quantile_sorted(a.ratios, 0.5);
    st.q25_bias_se = quantile_sorted(a.ratios, 0.25);
    st.q75_bias_se = quantile_sorted(a.ratios, 0.75);
    out.aggregates.push_back(std::move(st));
  }
  return out;
}

}  // namespace plasmode
