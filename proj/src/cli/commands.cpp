#include "fraudlab/cli/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <map>
#include <set>

#include <json.hpp>

#include "fraudlab/cli/artifact.hpp"
#include "fraudlab/datagen/dataset_io.hpp"
#include "fraudlab/io.hpp"
#include "fraudlab/rng.hpp"
#include "fraudlab/sha256.hpp"

namespace fraudlab::cli {

namespace {

namespace fs = std::filesystem;

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw data_error("cannot create directory: " + dir);
}

void note(const std::string& line) { std::printf("%s\n", line.c_str()); }

eval::VariantResult variant_from(const std::string& name, const eval::CvReport& cv) {
  eval::VariantResult v;
  v.name = name;
  v.moe_mean = cv.moe_mean;
  v.lstm_mean = cv.lstm_mean;
  v.transformer_mean = cv.transformer_mean;
  return v;
}

void write_tables(const std::string& dir, const eval::RunReport& report,
                  const std::vector<eval::PredictionRow>& predictions) {
  ensure_dir(dir);
  write_text(dir + "/model_comparison.txt", eval::render_model_comparison(report.cv));
  write_text(dir + "/transaction_type.txt",
             eval::render_transaction_type_table(predictions,
                                                 report.decision_threshold));
  write_text(dir + "/expert_weights.txt",
             eval::render_expert_weights(report.cv.profile));
  write_text(dir + "/ablation.txt", eval::render_ablation(report.ablation));
  write_text(dir + "/complementarity.txt",
             eval::render_complementarity(report.cv.complementarity));
  if (!report.preprocessing_variants.empty())
    write_text(dir + "/preprocessing.txt",
               eval::render_preprocessing_table(report.preprocessing_variants));
  if (!report.window_variants.empty())
    write_text(dir + "/time_window.txt",
               eval::render_time_window_table(report.window_variants));
}

}  // namespace

std::vector<datagen::TransactionRecord> subsample_by_cards(
    const std::vector<datagen::TransactionRecord>& corpus, double fraction,
    std::uint64_t seed) {
  if (fraction >= 1.0) return corpus;
  std::map<std::int64_t, bool> card_has_fraud;
  for (const auto& r : corpus) {
    auto& f = card_has_fraud[r.cardholder_id];
    f = f || r.fraud;
  }
  std::vector<std::int64_t> fraud_cards, clean_cards;
  for (const auto& [card, has] : card_has_fraud)
    (has ? fraud_cards : clean_cards).push_back(card);
  Rng rng(derive_seed(seed, 0x5ca1e));
  rng.shuffle(fraud_cards);
  rng.shuffle(clean_cards);
  std::set<std::int64_t> keep;
  const auto take = [&](std::vector<std::int64_t>& cards) {
    const auto want = static_cast<std::size_t>(
        std::llround(fraction * static_cast<double>(cards.size())));
    for (std::size_t i = 0; i < std::max<std::size_t>(1, want) && i < cards.size(); ++i)
      keep.insert(cards[i]);
  };
  take(fraud_cards);
  take(clean_cards);
  std::vector<datagen::TransactionRecord> out;
  for (const auto& r : corpus)
    if (keep.count(r.cardholder_id)) out.push_back(r);
  return out;
}

void cmd_generate(const PipelineConfig& config, const std::string& out_dir) {
  ensure_dir(out_dir);
  note("generating corpus: " + std::to_string(config.generator.corpus_size) +
       " rows over " + std::to_string(config.generator.n_accounts) + " accounts");
  auto corpus = datagen::generate_corpus(config.generator);

  const std::string csv = datagen::to_csv(corpus);
  const std::string jsonl = datagen::to_jsonl(corpus);
  write_text(out_dir + "/dataset.csv", csv);
  write_text(out_dir + "/dataset.jsonl", jsonl);

  auto manifest = datagen::summarize(config.generator, corpus);
  manifest.csv_digest = sha256_hex(csv);
  manifest.jsonl_digest = sha256_hex(jsonl);
  datagen::write_manifest(out_dir + "/generation_manifest.json", manifest);
  write_text(out_dir + "/config.txt", config_to_text(config));

  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "wrote %lld rows, fraud rate %.4f, amount mean %.2f",
                static_cast<long long>(manifest.rows), manifest.realized_fraud_rate,
                manifest.amount_mean);
  note(buf);
}

eval::RunReport run_full_study(const std::vector<datagen::TransactionRecord>& corpus,
                               const PipelineConfig& config,
                               std::vector<eval::FoldArtifacts>* artifacts_out) {
  eval::RunReport report;
  report.decision_threshold = config.pipeline.decision_threshold;

  note("cross-validating over " + std::to_string(config.pipeline.k_folds) + " folds");
  std::vector<eval::FoldArtifacts> artifacts;
  report.cv = eval::cross_validate(corpus, config.pipeline, &artifacts);

  note("running ablation (gate retrained per 2-expert subset)");
  report.ablation = eval::ablation_run(report.cv, artifacts, config.pipeline);
  note("running entropy study");
  report.entropy = eval::entropy_study(artifacts, config.pipeline);

  // reduced-scale variant studies on a card subsample
  auto variant_corpus =
      subsample_by_cards(corpus, config.variant_card_fraction, config.pipeline.seed);
  auto variant_options = [&](bool normalize, bool smote) {
    eval::PipelineOptions opt = config.pipeline;
    opt.normalize = normalize;
    opt.smote = smote;
    opt.k_folds = config.variant_folds;
    return opt;
  };
  note("running preprocessing variants on " +
       std::to_string(variant_corpus.size()) + " rows");
  report.preprocessing_variants.push_back(variant_from(
      "no normalization", eval::cross_validate(variant_corpus,
                                               variant_options(false, false))));
  report.preprocessing_variants.push_back(variant_from(
      "normalization", eval::cross_validate(variant_corpus,
                                            variant_options(true, false))));
  report.preprocessing_variants.push_back(variant_from(
      "normalization+smote", eval::cross_validate(variant_corpus,
                                                  variant_options(true, true))));

  note("running time-window variants");
  for (std::int64_t days : {7, 15, 30}) {
    eval::PipelineOptions opt = config.pipeline;
    opt.k_folds = config.variant_folds;
    opt.window_days = days;
    report.window_variants.push_back(
        variant_from(std::to_string(days), eval::cross_validate(variant_corpus, opt)));
  }

  if (artifacts_out) *artifacts_out = std::move(artifacts);
  return report;
}

void cmd_train(const PipelineConfig& config, const std::string& dataset_path,
               const std::string& out_dir) {
  ensure_dir(out_dir);
  auto corpus = datagen::read_dataset_csv(dataset_path);
  note("loaded " + std::to_string(corpus.size()) + " rows from " + dataset_path);

  eval::RunReport report = run_full_study(corpus, config);

  note("fitting the full-data model for the artifact");
  eval::TrainedPipeline model = eval::fit_full(corpus, config.pipeline);
  save_artifact(out_dir + "/artifact.json", model, config);

  // in-sample reference so `evaluate` on the training file can be checked
  eval::CvReport in_sample = eval::evaluate_pipeline(model, corpus, config.pipeline);

  const std::string predictions_csv = eval::predictions_to_csv(report.cv.predictions);
  write_text(out_dir + "/predictions.csv", predictions_csv);
  write_text(out_dir + "/metrics.json", eval::run_report_to_json(report));
  write_text(out_dir + "/final_fit_metrics.json",
             eval::run_report_to_json([&] {
               eval::RunReport r;
               r.cv = in_sample;
               r.decision_threshold = config.pipeline.decision_threshold;
               return r;
             }()));
  write_text(out_dir + "/activation_profile.csv", report.cv.profile.to_csv());
  write_text(out_dir + "/config.txt", config_to_text(config));
  write_tables(out_dir + "/tables", report, report.cv.predictions);

  nlohmann::ordered_json manifest;
  manifest["dataset"] = dataset_path;
  manifest["rows"] = corpus.size();
  manifest["seed"] = config.pipeline.seed;
  manifest["metrics_sha256"] = sha256_hex(eval::run_report_to_json(report));
  manifest["predictions_sha256"] = sha256_hex(predictions_csv);
  manifest["artifact_sha256"] = sha256_hex(artifact_to_json(model, config));
  write_text(out_dir + "/run_manifest.json", manifest.dump(2) + "\n");

  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "cv moe: acc %.4f prec %.4f rec %.4f f1 %.4f auc %.4f",
                report.cv.moe_mean.accuracy, report.cv.moe_mean.precision,
                report.cv.moe_mean.recall, report.cv.moe_mean.f1,
                report.cv.moe_mean.auc);
  note(buf);
}

void cmd_evaluate(const std::string& artifact_path, const std::string& dataset_path,
                  const std::string& out_dir) {
  ensure_dir(out_dir);
  PipelineConfig config;
  eval::TrainedPipeline model = load_artifact(artifact_path, &config);
  auto corpus = datagen::read_dataset_csv(dataset_path);
  note("scoring " + std::to_string(corpus.size()) + " rows with " + artifact_path);

  eval::CvReport cv = eval::evaluate_pipeline(model, corpus, config.pipeline);
  eval::RunReport report;
  report.cv = cv;
  report.decision_threshold = config.pipeline.decision_threshold;
  write_text(out_dir + "/evaluation.json", eval::run_report_to_json(report));
  write_text(out_dir + "/predictions.csv", eval::predictions_to_csv(cv.predictions));
  write_text(out_dir + "/tables_model_comparison.txt",
             eval::render_model_comparison(cv));

  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "moe: acc %.4f prec %.4f rec %.4f f1 %.4f auc %.4f ap %.4f",
                cv.moe_mean.accuracy, cv.moe_mean.precision, cv.moe_mean.recall,
                cv.moe_mean.f1, cv.moe_mean.auc, cv.moe_mean.ap);
  note(buf);
}

void cmd_ablate(const PipelineConfig& config, const std::string& dataset_path,
                const std::string& out_dir) {
  ensure_dir(out_dir);
  auto corpus = datagen::read_dataset_csv(dataset_path);
  std::vector<eval::FoldArtifacts> artifacts;
  eval::CvReport cv = eval::cross_validate(corpus, config.pipeline, &artifacts);
  auto rows = eval::ablation_run(cv, artifacts, config.pipeline);

  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    j.push_back({{"removed", r.removed},
                 {"f1", r.metrics.f1},
                 {"delta_f1", r.delta_f1},
                 {"recall", r.metrics.recall},
                 {"delta_recall", r.delta_recall},
                 {"outlier_recall", r.outlier_recall},
                 {"delta_outlier_recall", r.delta_outlier_recall}});
  }
  write_text(out_dir + "/ablation.json", j.dump(2) + "\n");
  write_text(out_dir + "/ablation.txt", eval::render_ablation(rows));
  note("ablation rows: " + std::to_string(rows.size()));
}

void cmd_report(const std::string& run_dir) {
  const std::string metrics_path = run_dir + "/metrics.json";
  const std::string predictions_path = run_dir + "/predictions.csv";
  if (!file_exists(metrics_path) || !file_exists(predictions_path))
    throw data_error("report: missing metrics.json or predictions.csv in " + run_dir);

  eval::RunReport stored = eval::run_report_from_json(read_text(metrics_path));
  auto predictions = eval::predictions_from_csv_text(read_text(predictions_path));

  // Tables 1/6/8 and the complementarity list are recomputed from the
  // prediction log alone; variant and ablation tables come from the stored
  // summaries of their own runs.
  eval::RunReport regenerated;
  regenerated.decision_threshold = stored.decision_threshold;
  regenerated.cv =
      eval::cv_report_from_predictions(predictions, stored.decision_threshold);
  regenerated.ablation = stored.ablation;
  regenerated.entropy = stored.entropy;
  regenerated.preprocessing_variants = stored.preprocessing_variants;
  regenerated.window_variants = stored.window_variants;

  write_tables(run_dir + "/tables", regenerated, predictions);
  write_text(run_dir + "/activation_profile.csv", regenerated.cv.profile.to_csv());
  note("regenerated tables under " + run_dir + "/tables");
}

}  // namespace fraudlab::cli
