// Command-line front end: study configs in, tables and CSV artifacts out.
//
//   plasmode run <config>              full Monte Carlo study
//   plasmode oracle <config>           resampling-bias targets for the source
//   plasmode generate-source <config>  write the source dataset + truths
//   plasmode report <replicates.csv>   recompute summary tables from a CSV
//
// <config> is a JSON file path or a built-in config name (e.g. s1_n1000).
// Exit codes: 0 success, 2 configuration/input problem, 1 runtime failure.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "plasmode/csv.hpp"
#include "plasmode/glm.hpp"
#include "plasmode/monte_carlo.hpp"
#include "plasmode/oracle.hpp"
#include "plasmode/report_io.hpp"
#include "plasmode/run_config.hpp"

namespace {

constexpr const char* kVersion = "plasmode 0.1.0";

std::string iso_utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string join(const std::vector<std::string>& v, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += sep;
    out += v[i];
  }
  return out;
}

plasmode::RunConfig resolve_config(const std::string& arg) {
  if (std::filesystem::exists(arg)) return plasmode::load_run_config(arg);
  try {
    return plasmode::builtin_run_config(arg);
  } catch (const plasmode::ConfigError&) {
    throw plasmode::ConfigError("config error: '" + arg +
                                "' is neither a config file nor a built-in config (built-ins: " +
                                join(plasmode::builtin_config_names(), ", ") + ")");
  }
}

struct CommonArgs {
  std::string config_arg;
  std::string output_dir;
  std::uint64_t seed = 0;
  int workers = 1;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* outdir_opt = nullptr;

  void attach(CLI::App* sub, bool with_workers) {
    sub->add_option("config", config_arg,
                    "config file path or built-in config name")
        ->required();
    seed_opt = sub->add_option("--seed", seed, "override the config's master_seed");
    outdir_opt = sub->add_option("--output-dir", output_dir, "override the output directory");
    if (with_workers)
      sub->add_option("--workers", workers, "worker threads (0 = all hardware threads)")
          ->check(CLI::NonNegativeNumber);
  }

  plasmode::RunConfig load() const {
    plasmode::RunConfig cfg = resolve_config(config_arg);
    if (seed_opt->count() > 0) cfg.master_seed = seed;
    if (outdir_opt->count() > 0) cfg.output_dir = output_dir;
    return cfg;
  }
};

int do_run(const CommonArgs& args) {
  const plasmode::RunConfig cfg = args.load();
  plasmode::RunInfo info;
  info.workers = args.workers;
  info.tool_version = kVersion;
  info.started_at = iso_utc_now();
  const auto t0 = std::chrono::steady_clock::now();

  std::vector<std::string> written;
  if (cfg.n_sources == 1) {
    const plasmode::MonteCarloResult res = plasmode::run_monte_carlo(args.workers == 1
        ? cfg.to_monte_carlo() : cfg.to_monte_carlo(args.workers));
    const auto summary =
        plasmode::summarize_all(res.records, res.source.truths, cfg.estimands);
    written = plasmode::write_run_artifacts(cfg.output_dir, cfg, res, summary);
    std::cout << plasmode::format_summary_table(summary);
  } else {
    const plasmode::MonteCarloConfig mc = cfg.to_monte_carlo(args.workers);
    const plasmode::MultiSourceResult multi = plasmode::multi_source_study(
        mc, cfg.n_sources, cfg.estimands,
        [&](int k, const plasmode::MonteCarloResult& res) {
          char sub[32];
          std::snprintf(sub, sizeof(sub), "source_%02d", k);
          const auto summary =
              plasmode::summarize_all(res.records, res.source.truths, cfg.estimands);
          auto paths = plasmode::write_source_run_dir(
              (std::filesystem::path(cfg.output_dir) / sub).string(), res, summary);
          written.insert(written.end(), paths.begin(), paths.end());
        });
    auto top = plasmode::write_multi_source_artifacts(cfg.output_dir, cfg, multi);
    written.insert(written.end(), top.begin(), top.end());
    std::printf("cross-source bias:SE by cell (%d sources)\n", cfg.n_sources);
    std::printf("%-10s %-20s %-8s %10s %10s %10s\n", "estimator", "framework", "estimand",
                "median", "q25", "q75");
    for (const auto& s : multi.aggregates)
      std::printf("%-10s %-20s %-8s %10.4f %10.4f %10.4f\n", s.estimator.c_str(),
                  plasmode::framework_name(s.framework).c_str(), s.estimand.c_str(),
                  s.median_bias_se, s.q25_bias_se, s.q75_bias_se);
  }

  info.finished_at = iso_utc_now();
  info.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  plasmode::write_run_info(cfg.output_dir, info);
  std::cout << "\nwrote " << written.size() + 1 << " files under " << cfg.output_dir << "\n";
  return 0;
}

int do_oracle(const CommonArgs& args) {
  const plasmode::RunConfig cfg = args.load();
  const plasmode::ScenarioSpec spec = cfg.resolve_scenario();
  const plasmode::SourceDataset src =
      plasmode::generate_source(spec, cfg.n, cfg.master_seed);
  const plasmode::FittedGLM gbar =
      plasmode::fit_logistic_weighted(src.data, src.data.a, spec.ps_design());
  if (!gbar.converged)
    throw std::runtime_error("oracle: propensity fit on the source did not converge");
  const plasmode::AteBiasTargets targets =
      plasmode::ate_bias_targets(src.data, gbar, spec.outcome);
  // Also exercises the internal cancellation assertion.
  plasmode::generate_treatment_target_identity(src, gbar, spec.outcome);

  std::filesystem::create_directories(cfg.output_dir);
  const std::string csv_path =
      (std::filesystem::path(cfg.output_dir) / "oracle.csv").string();
  const std::string txt_path =
      (std::filesystem::path(cfg.output_dir) / "oracle.txt").string();
  const std::string csv = plasmode::oracle_csv(targets, cfg.n);
  const std::string txt = plasmode::format_oracle_report(targets, cfg.n);
  std::ofstream(csv_path, std::ios::binary) << csv;
  std::ofstream(txt_path, std::ios::binary) << txt;
  std::cout << txt << "\nwrote " << csv_path << " and " << txt_path << "\n";
  return 0;
}

int do_generate_source(const CommonArgs& args) {
  const plasmode::RunConfig cfg = args.load();
  const plasmode::ScenarioSpec spec = cfg.resolve_scenario();
  const plasmode::SourceDataset src =
      plasmode::generate_source(spec, cfg.n, cfg.master_seed);

  std::filesystem::create_directories(cfg.output_dir);
  const std::string src_path =
      (std::filesystem::path(cfg.output_dir) / "source.csv").string();
  const std::string truth_path =
      (std::filesystem::path(cfg.output_dir) / "truths.csv").string();
  {
    std::ofstream out(src_path, std::ios::binary);
    plasmode::write_source_csv(out, src.data);
  }
  {
    std::ofstream out(truth_path, std::ios::binary);
    plasmode::write_truths_csv(out, src.truths);
  }
  std::cout << "scenario " << spec.id << ", n = " << cfg.n << ", seed = " << cfg.master_seed
            << "\n";
  std::printf("truths: ey1 = %.8f, ey0 = %.8f, ate = %.8f", src.truths.ey1, src.truths.ey0,
              src.truths.ate);
  if (src.truths.rr) std::printf(", rr = %.8f", *src.truths.rr);
  if (src.truths.logcor) std::printf(", logcor = %.8f", *src.truths.logcor);
  std::printf("\nwrote %s and %s\n", src_path.c_str(), truth_path.c_str());
  return 0;
}

int do_report(const std::string& replicates_path, const std::string& truths_path,
              std::vector<std::string> estimands, const std::string& output_dir) {
  const auto records = plasmode::read_estimates_csv_file(replicates_path);
  const plasmode::TruthSet truths = plasmode::read_truths_csv_file(truths_path);
  if (estimands.empty()) {
    estimands = {"ey1", "ey0", "ate"};
    if (truths.rr) estimands.push_back("rr");
    if (truths.logcor) estimands.push_back("logcor");
  }
  const auto summary = plasmode::summarize_all(records, truths, estimands);
  std::cout << plasmode::format_summary_table(summary);
  if (!output_dir.empty()) {
    std::filesystem::create_directories(output_dir);
    const std::string csv_path =
        (std::filesystem::path(output_dir) / "summary.csv").string();
    const std::string txt_path =
        (std::filesystem::path(output_dir) / "summary.txt").string();
    {
      std::ofstream out(csv_path, std::ios::binary);
      plasmode::write_summary_csv(out, summary);
    }
    std::ofstream(txt_path, std::ios::binary) << plasmode::format_summary_table(summary);
    std::cout << "wrote " << csv_path << " and " << txt_path << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"plasmode-simulation study runner: known-truth benchmarking of "
               "causal estimators on semi-synthetic data"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  CommonArgs run_args, oracle_args, gen_args;
  CLI::App* run_cmd = app.add_subcommand("run", "run the configured Monte Carlo study");
  run_args.attach(run_cmd, /*with_workers=*/true);
  CLI::App* oracle_cmd = app.add_subcommand(
      "oracle", "write the fixed-treatment resampling bias targets for the config's source");
  oracle_args.attach(oracle_cmd, /*with_workers=*/false);
  CLI::App* gen_cmd =
      app.add_subcommand("generate-source", "generate and write the source dataset");
  gen_args.attach(gen_cmd, /*with_workers=*/false);

  std::string rep_path, rep_truths, rep_outdir;
  std::vector<std::string> rep_estimands;
  CLI::App* report_cmd =
      app.add_subcommand("report", "recompute summary tables from a replicates CSV");
  report_cmd->add_option("replicates", rep_path, "replicates.csv from a previous run")
      ->required()
      ->check(CLI::ExistingFile);
  report_cmd->add_option("--truths", rep_truths, "truths.csv for the same source")
      ->required()
      ->check(CLI::ExistingFile);
  report_cmd->add_option("--estimands", rep_estimands, "estimands to tabulate")
      ->delimiter(',');
  report_cmd->add_option("--output-dir", rep_outdir, "also write summary.csv/summary.txt");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (run_cmd->parsed()) return do_run(run_args);
    if (oracle_cmd->parsed()) return do_oracle(oracle_args);
    if (gen_cmd->parsed()) return do_generate_source(gen_args);
    return do_report(rep_path, rep_truths, rep_estimands, rep_outdir);
  } catch (const plasmode::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const plasmode::CsvError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
