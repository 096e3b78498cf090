// fraudlab: synthetic credit-card fraud corpus generation and
// mixture-of-experts training / evaluation pipeline.

#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "fraudlab/cli/commands.hpp"
#include "fraudlab/common.hpp"

namespace {

using fraudlab::cli::PipelineConfig;

PipelineConfig resolve_config(const std::string& config_path, bool have_seed,
                              std::uint64_t seed, bool no_smote, int window_days) {
  PipelineConfig config;
  if (!config_path.empty()) config = fraudlab::cli::load_config(config_path);
  if (have_seed) {
    config.generator.seed = seed;
    config.pipeline.seed = seed;
  }
  if (no_smote) config.pipeline.smote = false;
  if (window_days > 0) config.pipeline.window_days = window_days;
  config.validate();
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"synthetic fraud corpus + mixture-of-experts pipeline"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "run";
  std::string dataset_path;
  std::string artifact_path;
  std::string run_dir;
  std::uint64_t seed = 0;
  bool have_seed = false;
  bool no_smote = false;
  int window_days = 0;

  auto add_common = [&](CLI::App* cmd, bool with_dataset) {
    cmd->add_option("--config", config_path, "key-value config file");
    cmd->add_option("--out", out_dir, "output directory");
    cmd->add_option("--seed", seed, "override the config seed")
        ->each([&](const std::string&) { have_seed = true; });
    cmd->add_flag("--no-smote", no_smote, "disable SMOTE oversampling");
    cmd->add_option("--window-days", window_days,
                    "time-window lookback in days (7, 15 or 30)")
        ->check(CLI::IsMember({7, 15, 30}));
    if (with_dataset)
      cmd->add_option("--dataset", dataset_path, "dataset csv")->required();
  };

  CLI::App* generate = app.add_subcommand("generate", "emit a synthetic corpus");
  add_common(generate, false);

  CLI::App* train = app.add_subcommand("train", "cross-validate, study, and fit");
  add_common(train, true);

  CLI::App* evaluate = app.add_subcommand("evaluate", "score a dataset with an artifact");
  evaluate->add_option("--artifact", artifact_path, "model artifact json")->required();
  evaluate->add_option("--dataset", dataset_path, "dataset csv")->required();
  evaluate->add_option("--out", out_dir, "output directory");

  CLI::App* ablate = app.add_subcommand("ablate", "expert-removal study");
  add_common(ablate, true);

  CLI::App* report = app.add_subcommand("report", "regenerate tables from a run dir");
  report->add_option("--run", run_dir, "run directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (generate->parsed()) {
      cmd_generate(resolve_config(config_path, have_seed, seed, no_smote, window_days),
                   out_dir);
    } else if (train->parsed()) {
      cmd_train(resolve_config(config_path, have_seed, seed, no_smote, window_days),
                dataset_path, out_dir);
    } else if (evaluate->parsed()) {
      fraudlab::cli::cmd_evaluate(artifact_path, dataset_path, out_dir);
    } else if (ablate->parsed()) {
      cmd_ablate(resolve_config(config_path, have_seed, seed, no_smote, window_days),
                 dataset_path, out_dir);
    } else if (report->parsed()) {
      fraudlab::cli::cmd_report(run_dir);
    }
  } catch (const fraudlab::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.exit_code();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
