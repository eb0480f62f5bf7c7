// Hot paths of a study: GLM fits, plasmode draws, and one full replicate
// (draw + every estimator). Sized like the published designs (n = 1000 and
// n = 10000) so replicate-count budgets can be read straight off the output.

#include <benchmark/benchmark.h>

#include "plasmode/estimators.hpp"
#include "plasmode/glm.hpp"
#include "plasmode/resample.hpp"
#include "plasmode/scenario.hpp"

using namespace plasmode;

static SourceDataset make_source(const std::string& id, Eigen::Index n) {
  return generate_source(builtin_scenario(id), n, 12345);
}

static void BM_FitLogisticPs(benchmark::State& state) {
  const auto spec = builtin_scenario("s1");
  const auto src = make_source("s1", state.range(0));
  for (auto _ : state) {
    auto fit = fit_logistic_weighted(src.data, src.data.a, spec.ps_design());
    benchmark::DoNotOptimize(fit);
  }
}
BENCHMARK(BM_FitLogisticPs)->Arg(1000)->Arg(10000);

static void BM_FitLinearOutcome(benchmark::State& state) {
  const auto spec = builtin_scenario("s1");
  const auto src = make_source("s1", state.range(0));
  for (auto _ : state) {
    auto fit = fit_linear_weighted(src.data, spec.outcome_design());
    benchmark::DoNotOptimize(fit);
  }
}
BENCHMARK(BM_FitLinearOutcome)->Arg(1000)->Arg(10000);

static void BM_DrawSampleTreatment(benchmark::State& state) {
  const auto spec = builtin_scenario("s1");
  const auto src = make_source("s1", state.range(0));
  RngStream rng(1, "bench", 0);
  for (auto _ : state) {
    Dataset d = draw_sample_treatment(src, spec.outcome, rng);
    benchmark::DoNotOptimize(d);
  }
}
BENCHMARK(BM_DrawSampleTreatment)->Arg(1000)->Arg(10000);

static void BM_DrawGenerateTreatment(benchmark::State& state) {
  const auto spec = builtin_scenario("s1");
  const auto src = make_source("s1", state.range(0));
  RngStream rng(1, "bench", 1);
  for (auto _ : state) {
    Dataset d = draw_generate_treatment(src, spec.ps, spec.outcome, rng);
    benchmark::DoNotOptimize(d);
  }
}
BENCHMARK(BM_DrawGenerateTreatment)->Arg(1000)->Arg(10000);

static void BM_ReplicateAllEstimators(benchmark::State& state) {
  // One sample-treatment replicate end to end, every standard estimator.
  const auto spec = builtin_scenario(state.range(0) == 10000 ? "s3" : "s1");
  const auto src = make_source(spec.id, state.range(0));
  WorkingModels wm;
  wm.ps_design = spec.ps_design();
  wm.outcome_design = spec.outcome_design();
  const std::vector<std::string> ids = {"unadj", "match", "iptw", "glm_cm", "glm_ps", "tmle"};
  RngStream rng(1, "bench", 2);
  for (auto _ : state) {
    Dataset d = draw_sample_treatment(src, spec.outcome, rng);
    auto recs = run_estimators(d, wm, ids);
    benchmark::DoNotOptimize(recs);
  }
}
BENCHMARK(BM_ReplicateAllEstimators)->Arg(1000)->Arg(10000);

BENCHMARK_MAIN();
