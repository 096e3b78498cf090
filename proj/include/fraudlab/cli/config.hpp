#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "fraudlab/datagen/generator.hpp"
#include "fraudlab/eval/cross_validate.hpp"

namespace fraudlab::cli {

// User-facing configuration: generator knobs plus pipeline options plus the
// reduced-scale settings used for the variant studies. Parsed from a
// "key value" file; unknown keys are rejected before any work starts.
struct PipelineConfig {
  datagen::GeneratorConfig generator;
  eval::PipelineOptions pipeline;
  // variant studies run on a card-subsampled corpus with fewer folds
  double variant_card_fraction = 0.4;
  int variant_folds = 2;
  std::string out_dir = "run";

  void validate() const;
};

PipelineConfig parse_config_text(const std::string& text);
PipelineConfig load_config(const std::string& path);
std::string config_to_text(const PipelineConfig& config);

}  // namespace fraudlab::cli
