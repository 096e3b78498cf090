#pragma once

#include <string>
#include <vector>

#include "fraudlab/cli/config.hpp"
#include "fraudlab/eval/reports.hpp"

namespace fraudlab::cli {

// generate: dataset.csv + dataset.jsonl + generation_manifest.json
void cmd_generate(const PipelineConfig& config, const std::string& out_dir);

// train: cross-validation report bundle, variant studies, ablation, entropy
// study, final full-data fit and its artifact
void cmd_train(const PipelineConfig& config, const std::string& dataset_path,
               const std::string& out_dir);

// evaluate: score a dataset with a frozen artifact
void cmd_evaluate(const std::string& artifact_path, const std::string& dataset_path,
                  const std::string& out_dir);

// ablate: cross-validate then emit only the ablation table
void cmd_ablate(const PipelineConfig& config, const std::string& dataset_path,
                const std::string& out_dir);

// report: regenerate every table from the persisted logs, no recomputation
// of models
void cmd_report(const std::string& run_dir);

// card-level subsample used by the reduced-scale variant studies
std::vector<datagen::TransactionRecord> subsample_by_cards(
    const std::vector<datagen::TransactionRecord>& corpus, double fraction,
    std::uint64_t seed);

// shared by cmd_train and the acceptance suite
eval::RunReport run_full_study(const std::vector<datagen::TransactionRecord>& corpus,
                               const PipelineConfig& config,
                               std::vector<eval::FoldArtifacts>* artifacts_out = nullptr);

}  // namespace fraudlab::cli
