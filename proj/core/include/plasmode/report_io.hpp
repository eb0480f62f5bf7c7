#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "plasmode/monte_carlo.hpp"
#include "plasmode/oracle.hpp"
#include "plasmode/run_config.hpp"

namespace plasmode {

// Machine-readable summary table. Metric columns keep the reporting order
// %bias, se, rmse, bias:se; pct_bias is empty when the truth is zero.
std::string summary_csv_header();
void write_summary_csv(std::ostream& out, const std::vector<MetricsSummary>& rows);

// Human-readable table, one block per estimand: estimator rows, one column
// group per framework with %Bias / SE / RMSE / Bias:SE / Cover%.
std::string format_summary_table(const std::vector<MetricsSummary>& rows);

// Cross-source aggregate table for multi-source studies.
std::string cross_source_csv_header();
void write_cross_source_csv(std::ostream& out, const std::vector<CrossSourceStat>& stats);

// Resampling-bias oracle report for one source: rows ey1 / ey0 / ate with the
// plasmode truth, the fixed-treatment resampling target, their gap, its
// root-n scaling, and the gap of the decomposition identity (always ~0).
std::string oracle_csv(const AteBiasTargets& t, Eigen::Index n);
std::string format_oracle_report(const AteBiasTargets& t, Eigen::Index n);

// Writes the deterministic artifact set for one completed run under dir:
// config.json, source.csv, truths.csv, replicates.csv, summary.csv,
// summary.txt. Returns the paths written. Creates dir if needed. Bytes depend
// only on (config, results) — timestamps live in write_run_info's sidecar.
std::vector<std::string> write_run_artifacts(const std::string& dir, const RunConfig& cfg,
                                             const MonteCarloResult& result,
                                             const std::vector<MetricsSummary>& summary);

// Per-source artifact subset (no config): source.csv, truths.csv,
// replicates.csv, summary.csv, summary.txt under dir.
std::vector<std::string> write_source_run_dir(const std::string& dir,
                                              const MonteCarloResult& result,
                                              const std::vector<MetricsSummary>& summary);

// Multi-source top level: config.json, per_source_summary.csv (every source's
// metric rows tagged by source index and seed), cross_source.csv.
std::vector<std::string> write_multi_source_artifacts(const std::string& dir,
                                                      const RunConfig& cfg,
                                                      const MultiSourceResult& multi);

// The one artifact allowed to differ between byte-identical reruns.
struct RunInfo {
  std::string started_at;   // ISO 8601 UTC
  std::string finished_at;  // ISO 8601 UTC
  double elapsed_seconds = 0.0;
  int workers = 1;
  std::string tool_version;
};
std::string run_info_sidecar_name();  // "run_info.txt"
void write_run_info(const std::string& dir, const RunInfo& info);

}  // namespace plasmode
