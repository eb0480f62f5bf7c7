#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "plasmode/dataset.hpp"
#include "plasmode/estimators.hpp"
#include "plasmode/resample.hpp"
#include "plasmode/scenario.hpp"

namespace plasmode {

struct MonteCarloConfig {
  ScenarioSpec scenario;
  Eigen::Index n = 1000;  // source size
  int replicates = 100;
  // Empty means both, in sample-treatment-first order.
  std::vector<Framework> frameworks;
  std::vector<std::string> estimators;
  std::uint64_t master_seed = 1;
  int workers = 1;  // 0 => hardware concurrency
  PlasmodeConfig plasmode;  // its framework member is ignored here
};

struct MonteCarloResult {
  SourceDataset source;
  WorkingModels working_models;
  // Canonical order: framework-major, then replicate, then estimator, no
  // matter how many workers executed the replicates.
  std::vector<EstimateRecord> records;
};

// Generate one source, then for every framework x replicate draw a plasmode
// dataset on its own substream and run every requested estimator. Bitwise
// deterministic in (config, master_seed); per-replicate estimator failures
// surface as non-converged records, never as aborts.
MonteCarloResult run_monte_carlo(const MonteCarloConfig& cfg);

// One row of the reporting table: performance of (estimator, framework) for
// one estimand against the source truth.
struct MetricsSummary {
  std::string estimator;
  Framework framework = Framework::sample_treatment;
  std::string estimand;
  double truth = 0.0;
  double bias = 0.0;                  // mean estimate - truth
  std::optional<double> pct_bias;     // absent when truth == 0
  double se = 0.0;                    // sample sd, denominator R-1
  double rmse = 0.0;
  double bias_se = 0.0;               // |bias|/se; 0 when both 0, inf when se 0 only
  double coverage = 0.0;              // % with |estimate - truth| <= 1.96 * se
  long n_replicates = 0;              // records seen for the cell
  long n_converged = 0;               // records used (converged, estimand present)
};

// Metrics per (estimator, framework) cell, in order of first appearance in
// `records`. Cells with fewer than two usable records are omitted (no sample
// sd exists). Throws if the truth set carries no value for the estimand.
std::vector<MetricsSummary> summarize(const std::vector<EstimateRecord>& records,
                                      const TruthSet& truths, const std::string& estimand);
std::vector<MetricsSummary> summarize_all(const std::vector<EstimateRecord>& records,
                                          const TruthSet& truths,
                                          const std::vector<std::string>& estimands);

// Deterministic seed for the k-th source of a multi-source study.
std::uint64_t source_seed_for(std::uint64_t master_seed, int source_index);

struct SourceRunSummary {
  std::uint64_t source_seed = 0;
  TruthSet truths;
  std::vector<MetricsSummary> metrics;
};

// Cross-source distribution of the bias:SE ratio for one table cell.
struct CrossSourceStat {
  std::string estimator;
  Framework framework = Framework::sample_treatment;
  std::string estimand;
  int n_sources = 0;
  double median_bias_se = 0.0;
  double q25_bias_se = 0.0;
  double q75_bias_se = 0.0;
};

struct MultiSourceResult {
  std::vector<SourceRunSummary> per_source;
  std::vector<CrossSourceStat> aggregates;
};

// Repeat run_monte_carlo over n_sources independently seeded sources (seeds
// from source_seed_for) and aggregate each cell's bias:SE across sources.
// The source seed is a nuisance parameter of the whole exercise; medians
// across sources separate systematic artifacts from seed luck. on_source, if
// given, sees each source's full result (index, result) as it completes, so
// callers can persist replicate tables without re-running anything.
MultiSourceResult multi_source_study(
    const MonteCarloConfig& base, int n_sources, const std::vector<std::string>& estimands,
    const std::function<void(int, const MonteCarloResult&)>& on_source = {});

}  // namespace plasmode
