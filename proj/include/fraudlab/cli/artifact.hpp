#pragma once

#include <string>

#include "fraudlab/cli/config.hpp"
#include "fraudlab/eval/cross_validate.hpp"

namespace fraudlab::cli {

// Model artifact: one JSON document with base-16 little-endian float arrays
// for every parameter block. Round-trips byte-identically; the loader
// rejects any version it does not know.
inline constexpr int kArtifactVersion = 1;

std::string artifact_to_json(const eval::TrainedPipeline& model,
                             const PipelineConfig& config);
void save_artifact(const std::string& path, const eval::TrainedPipeline& model,
                   const PipelineConfig& config);
eval::TrainedPipeline load_artifact(const std::string& path,
                                    PipelineConfig* config_out = nullptr);
eval::TrainedPipeline artifact_from_json(const std::string& text,
                                         PipelineConfig* config_out = nullptr);

std::string hex_encode_doubles(const std::vector<double>& v);
std::vector<double> hex_decode_doubles(const std::string& hex);

}  // namespace fraudlab::cli
