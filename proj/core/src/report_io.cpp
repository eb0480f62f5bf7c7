#include "plasmode/report_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "plasmode/csv.hpp"

namespace plasmode {

namespace {

std::string fmt3(double x, int width) {
  char buf[64];
  if (std::isnan(x))
    std::snprintf(buf, sizeof(buf), "%*s", width, "na");
  else if (std::isinf(x))
    std::snprintf(buf, sizeof(buf), "%*s", width, x > 0 ? "inf" : "-inf");
  else
    std::snprintf(buf, sizeof(buf), "%*.3f", width, x);
  return buf;
}

std::string fmt_cell(const std::optional<double>& x, int width) {
  if (!x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%*s", width, "na");
    return buf;
  }
  return fmt3(*x, width);
}

std::string pretty_framework(Framework fw) {
  return fw == Framework::sample_treatment ? "Sample Treatment" : "Generate Treatment";
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  return out;
}

std::string csv_optional(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

void append_summary_row(std::ostream& out, const MetricsSummary& m) {
  out << m.estimator << ',' << framework_name(m.framework) << ',' << m.estimand << ','
      << format_double(m.truth) << ',' << csv_optional(m.pct_bias) << ','
      << format_double(m.se) << ',' << format_double(m.rmse) << ','
      << format_double(m.bias_se) << ',' << format_double(m.coverage) << ','
      << format_double(m.bias) << ',' << m.n_replicates << ',' << m.n_converged << '\n';
}

struct OracleRow {
  const char* quantity;
  double psi, target, b, scaled, gap;
};

std::vector<OracleRow> oracle_rows(const AteBiasTargets& t, Eigen::Index n) {
  const double root_n = std::sqrt(static_cast<double>(n));
  const double b_ate = t.arm1.b_n - t.arm0.b_n;
  return {
      {"ey1", t.arm1.psi_n, t.arm1.iptw_target, t.arm1.b_n, t.arm1.scaled,
       t.arm1.b_n - (t.arm1.iptw_target - t.arm1.psi_n)},
      {"ey0", t.arm0.psi_n, t.arm0.iptw_target, t.arm0.b_n, t.arm0.scaled,
       t.arm0.b_n - (t.arm0.iptw_target - t.arm0.psi_n)},
      {"ate", t.ate_psi, t.ate_target, b_ate, root_n * b_ate,
       b_ate - (t.ate_target - t.ate_psi)},
  };
}

}  // namespace

std::string summary_csv_header() {
  return "estimator,framework,estimand,truth,pct_bias,se,rmse,bias_se,coverage,bias,"
         "n_replicates,n_converged";
}

void write_summary_csv(std::ostream& out, const std::vector<MetricsSummary>& rows) {
  out << summary_csv_header() << '\n';
  for (const auto& m : rows) append_summary_row(out, m);
}

std::string format_summary_table(const std::vector<MetricsSummary>& rows) {
  // Preserve first-appearance order of estimands, estimators and frameworks.
  std::vector<std::string> estimands, estimators;
  std::vector<Framework> frameworks;
  for (const auto& m : rows) {
    if (std::find(estimands.begin(), estimands.end(), m.estimand) == estimands.end())
      estimands.push_back(m.estimand);
    if (std::find(estimators.begin(), estimators.end(), m.estimator) == estimators.end())
      estimators.push_back(m.estimator);
    if (std::find(frameworks.begin(), frameworks.end(), m.framework) == frameworks.end())
      frameworks.push_back(m.framework);
  }

  constexpr int name_w = 10;
  constexpr int cell_w = 9;
  constexpr int group_w = 5 * cell_w + 2;  // five metric cells + " |"

  std::ostringstream os;
  for (const auto& est : estimands) {
    const MetricsSummary* any = nullptr;
    for (const auto& m : rows)
      if (m.estimand == est) {
        any = &m;
        break;
      }
    os << "estimand: " << est;
    if (any) {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.6f", any->truth);
      os << "  (truth " << buf << ")";
    }
    os << "\n";

    char head[128];
    std::snprintf(head, sizeof(head), "%-*s", name_w, "estimator");
    os << head;
    for (const auto fw : frameworks) {
      std::snprintf(head, sizeof(head), " |%*s", group_w - 2, pretty_framework(fw).c_str());
      os << head;
    }
    os << "\n";
    std::snprintf(head, sizeof(head), "%-*s", name_w, "");
    os << head;
    for (std::size_t i = 0; i < frameworks.size(); ++i) {
      std::snprintf(head, sizeof(head), " |%*s%*s%*s%*s%*s", cell_w, "%Bias", cell_w, "SE",
                    cell_w, "RMSE", cell_w, "Bias:SE", cell_w, "Cov%");
      os << head;
    }
    os << "\n";

    for (const auto& name : estimators) {
      bool have_any = false;
      std::ostringstream line;
      char cell[64];
      std::snprintf(cell, sizeof(cell), "%-*s", name_w, name.c_str());
      line << cell;
      for (const auto fw : frameworks) {
        const MetricsSummary* m = nullptr;
        for (const auto& r : rows)
          if (r.estimand == est && r.estimator == name && r.framework == fw) {
            m = &r;
            break;
          }
        line << " |";
        if (m) {
          have_any = true;
          line << fmt_cell(m->pct_bias, cell_w) << fmt3(m->se, cell_w)
               << fmt3(m->rmse, cell_w) << fmt3(m->bias_se, cell_w)
               << fmt3(m->coverage, cell_w);
        } else {
          std::snprintf(cell, sizeof(cell), "%*s", 5 * cell_w, "");
          line << cell;
        }
      }
      if (have_any) os << line.str() << "\n";
    }
    os << "\n";
  }
  return os.str();
}

std::string cross_source_csv_header() {
  return "estimator,framework,estimand,n_sources,median_bias_se,q25_bias_se,q75_bias_se";
}

void write_cross_source_csv(std::ostream& out, const std::vector<CrossSourceStat>& stats) {
  out << cross_source_csv_header() << '\n';
  for (const auto& s : stats) {
    out << s.estimator << ',' << framework_name(s.framework) << ',' << s.estimand << ','
        << s.n_sources << ',' << format_double(s.median_bias_se) << ','
        << format_double(s.q25_bias_se) << ',' << format_double(s.q75_bias_se) << '\n';
  }
}

std::string oracle_csv(const AteBiasTargets& t, Eigen::Index n) {
  std::ostringstream os;
  os << "quantity,psi_n,iptw_target,b_n,sqrt_n_b_n,predicted_st_mean,identity_gap\n";
  for (const auto& r : oracle_rows(t, n)) {
    os << r.quantity << ',' << format_double(r.psi) << ',' << format_double(r.target) << ','
       << format_double(r.b) << ',' << format_double(r.scaled) << ','
       << format_double(r.target) << ',' << format_double(r.gap) << '\n';
  }
  return os.str();
}

std::string format_oracle_report(const AteBiasTargets& t, Eigen::Index n) {
  std::ostringstream os;
  os << "fixed-treatment resampling oracle (n = " << n << ")\n\n";
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%-8s %14s %14s %14s %14s %18s\n", "quantity", "psi_n",
                "iptw_target", "b_n", "sqrt(n)*b_n", "predicted ST mean");
  os << buf;
  for (const auto& r : oracle_rows(t, n)) {
    std::snprintf(buf, sizeof(buf), "%-8s %14.8f %14.8f %14.8f %14.8f %18.8f\n", r.quantity,
                  r.psi, r.target, r.b, r.scaled, r.target);
    os << buf;
  }
  os << "\nSample-Treatment replicate means of the plain inverse-weighted estimator\n"
        "converge to iptw_target (= psi_n + b_n); Generate-Treatment means converge\n"
        "to psi_n itself.\n";
  return os.str();
}

std::vector<std::string> write_source_run_dir(const std::string& dir,
                                              const MonteCarloResult& result,
                                              const std::vector<MetricsSummary>& summary) {
  std::filesystem::create_directories(dir);
  std::vector<std::string> written;
  auto emit = [&](const char* name, const std::function<void(std::ostream&)>& body) {
    const std::string path = (std::filesystem::path(dir) / name).string();
    auto out = open_out(path);
    body(out);
    written.push_back(path);
  };
  emit("source.csv", [&](std::ostream& o) { write_source_csv(o, result.source.data); });
  emit("truths.csv", [&](std::ostream& o) { write_truths_csv(o, result.source.truths); });
  emit("replicates.csv", [&](std::ostream& o) { write_estimates_csv(o, result.records); });
  emit("summary.csv", [&](std::ostream& o) { write_summary_csv(o, summary); });
  emit("summary.txt", [&](std::ostream& o) { o << format_summary_table(summary); });
  return written;
}

std::vector<std::string> write_run_artifacts(const std::string& dir, const RunConfig& cfg,
                                             const MonteCarloResult& result,
                                             const std::vector<MetricsSummary>& summary) {
  std::filesystem::create_directories(dir);
  const std::string cfg_path = (std::filesystem::path(dir) / "config.json").string();
  {
    auto out = open_out(cfg_path);
    out << serialize_run_config(cfg);
  }
  std::vector<std::string> written{cfg_path};
  auto rest = write_source_run_dir(dir, result, summary);
  written.insert(written.end(), rest.begin(), rest.end());
  return written;
}

std::vector<std::string> write_multi_source_artifacts(const std::string& dir,
                                                      const RunConfig& cfg,
                                                      const MultiSourceResult& multi) {
  std::filesystem::create_directories(dir);
  std::vector<std::string> written;
  {
    const std::string path = (std::filesystem::path(dir) / "config.json").string();
    auto out = open_out(path);
    out << serialize_run_config(cfg);
    written.push_back(path);
  }
  {
    const std::string path = (std::filesystem::path(dir) / "per_source_summary.csv").string();
    auto out = open_out(path);
    out << "source_index,source_seed," << summary_csv_header() << '\n';
    for (std::size_t k = 0; k < multi.per_source.size(); ++k) {
      for (const auto& m : multi.per_source[k].metrics) {
        out << k << ',' << multi.per_source[k].source_seed << ',';
        append_summary_row(out, m);
      }
    }
    written.push_back(path);
  }
  {
    const std::string path = (std::filesystem::path(dir) / "cross_source.csv").string();
    auto out = open_out(path);
    write_cross_source_csv(out, multi.aggregates);
    written.push_back(path);
  }
  return written;
}

std::string run_info_sidecar_name() { return "run_info.txt"; }

void write_run_info(const std::string& dir, const RunInfo& info) {
  std::filesystem::create_directories(dir);
  auto out = open_out((std::filesystem::path(dir) / run_info_sidecar_name()).string());
  out << "started_at: " << info.started_at << '\n'
      << "finished_at: " << info.finished_at << '\n'
      << "elapsed_seconds: " << info.elapsed_seconds << '\n'
      << "workers: " << info.workers << '\n'
      << "version: " << info.tool_version << '\n';
}

}  // namespace plasmode
