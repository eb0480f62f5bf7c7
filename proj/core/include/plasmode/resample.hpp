#pragma once

#include <Eigen/Core>

#include "plasmode/dataset.hpp"
#include "plasmode/model_spec.hpp"
#include "plasmode/rng.hpp"
#include "plasmode/scenario.hpp"

namespace plasmode {

// Where the generation-side nuisance models come from. `fitted_on_source`
// re-estimates them once on the realized source (the model-based bootstrap);
// `true_model` uses the data-generating models directly.
enum class GenerationModelSource { fitted_on_source, true_model };

struct PlasmodeConfig {
  Framework framework = Framework::generate_treatment;
  GenerationModelSource ps_for_generation = GenerationModelSource::fitted_on_source;
  GenerationModelSource outcome_for_generation = GenerationModelSource::true_model;
  Eigen::Index replicate_size = 0;  // 0 => source size
};

// Sample Treatment: resample (w, a) rows jointly with replacement, then draw
// y from the outcome model given the resampled treatment and covariates. The
// empirical (w, a) dependence of the source is preserved verbatim.
Dataset draw_sample_treatment(const SourceDataset& source, const ModelSpec& outcome_model,
                              RngStream& rng, Eigen::Index replicate_size = 0);

// Generate Treatment: resample covariate rows with replacement, draw a from
// the propensity model, then draw y from the outcome model.
Dataset draw_generate_treatment(const SourceDataset& source, const PsModel& ps_model,
                                const ModelSpec& outcome_model, RngStream& rng,
                                Eigen::Index replicate_size = 0);

}  // namespace plasmode
