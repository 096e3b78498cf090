#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <map>
#include <set>
#include <cstring>
#include <algorithm>

#include "fraudlab/cli/artifact.hpp"
#include "fraudlab/cli/commands.hpp"
#include "fraudlab/cli/config.hpp"
#include "fraudlab/datagen/dataset_io.hpp"
#include "fraudlab/io.hpp"
#include "fraudlab/sha256.hpp"

using namespace fraudlab;
using namespace fraudlab::cli;

namespace {

PipelineConfig smoke_config() {
  PipelineConfig c;
  c.generator.corpus_size = 1500;
  c.generator.n_accounts = 120;
  c.generator.horizon_days = 15;
  c.generator.fraud_rate = 0.05;
  c.generator.seed = 99;
  c.pipeline.seed = 99;
  c.pipeline.k_folds = 2;
  c.pipeline.window = 5;
  c.pipeline.transformer = {.d_model = 8, .heads = 2, .ffn = 16, .embed_dim = 2,
                            .window = 5};
  c.pipeline.lstm = {.hidden = 8, .embed_dim = 2};
  c.pipeline.autoencoder = {.hidden = 12, .bottleneck = 4};
  c.pipeline.train.max_epochs = 3;
  c.pipeline.train.patience = 3;
  c.variant_card_fraction = 0.5;
  c.variant_folds = 2;
  return c;
}

}  // namespace

TEST_CASE("config: parse, defaults, rejection of unknown keys and bad values") {
  PipelineConfig def = parse_config_text("");
  CHECK(def.generator.corpus_size == 50000);
  CHECK(def.generator.n_accounts == 2000);
  CHECK(def.generator.fraud_rate == doctest::Approx(0.015));
  CHECK(def.pipeline.k_folds == 5);
  CHECK(def.pipeline.window == 10);
  CHECK(def.pipeline.train.max_epochs == 50);
  CHECK(def.pipeline.train.patience == 5);

  PipelineConfig c = parse_config_text(
      "# comment\n"
      "corpus_size 2000\n"
      "seed 7\n"
      "window 6   # inline comment\n"
      "smote false\n"
      "gate_lambda 0.02\n");
  CHECK(c.generator.corpus_size == 2000);
  CHECK(c.generator.seed == 7);
  CHECK(c.pipeline.seed == 7);
  CHECK(c.pipeline.window == 6);
  CHECK(c.pipeline.transformer.window == 6);
  CHECK_FALSE(c.pipeline.smote);
  CHECK(c.pipeline.gate_lambda == doctest::Approx(0.02));

  CHECK_THROWS_AS(parse_config_text("no_such_key 5\n"), Error);
  CHECK_THROWS_AS(parse_config_text("fraud_rate 0.9\n"), Error);
  CHECK_THROWS_AS(parse_config_text("mix_other 0.5\n"), Error);
  CHECK_THROWS_AS(parse_config_text("heads 3\n"), Error);  // must divide d_model
  CHECK_THROWS_AS(parse_config_text("patience 0\n"), Error);
  CHECK_THROWS_AS(parse_config_text("learning_rate -1\n"), Error);
  CHECK_THROWS_AS(parse_config_text("window abc\n"), Error);

  // round trip through text keeps every field
  const std::string text = config_to_text(c);
  PipelineConfig back = parse_config_text(text);
  CHECK(config_to_text(back) == text);
}

TEST_CASE("artifact: hex codec and byte-identical round trip") {
  std::vector<double> v{0.0, 1.0, -1.5, 3.141592653589793, 1e-300, -0.0};
  const std::string hex = hex_encode_doubles(v);
  CHECK(hex.size() == v.size() * 16);
  auto back = hex_decode_doubles(hex);
  REQUIRE(back.size() == v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    CHECK(std::memcmp(&back[i], &v[i], sizeof(double)) == 0);
  CHECK_THROWS_AS(hex_decode_doubles("abc"), Error);

  PipelineConfig cfg = smoke_config();
  auto corpus = datagen::generate_corpus(cfg.generator);
  cfg.pipeline.train.max_epochs = 2;
  eval::TrainedPipeline model = eval::fit_full(corpus, cfg.pipeline);

  const std::string json1 = artifact_to_json(model, cfg);
  PipelineConfig cfg_back;
  eval::TrainedPipeline loaded = artifact_from_json(json1, &cfg_back);
  const std::string json2 = artifact_to_json(loaded, cfg_back);
  CHECK(sha256_hex(json1) == sha256_hex(json2));  // save -> load -> save

  // loaded model scores identically
  eval::CvReport a = eval::evaluate_pipeline(model, corpus, cfg.pipeline);
  eval::CvReport b = eval::evaluate_pipeline(loaded, corpus, cfg.pipeline);
  CHECK(eval::predictions_to_csv(a.predictions) ==
        eval::predictions_to_csv(b.predictions));

  // version gate
  std::string tampered = json1;
  const auto at = tampered.find("\"format_version\": 1");
  REQUIRE(at != std::string::npos);
  tampered.replace(at, 19, "\"format_version\": 9");
  CHECK_THROWS_WITH_AS(artifact_from_json(tampered),
                       "artifact: unsupported format version", Error);
}

TEST_CASE("cmd_generate: files, schema, digest-stable regeneration") {
  namespace fs = std::filesystem;
  PipelineConfig cfg = smoke_config();
  const std::string dir = "cli_gen_test";
  fs::remove_all(dir);
  cmd_generate(cfg, dir);
  REQUIRE(file_exists(dir + "/dataset.csv"));
  REQUIRE(file_exists(dir + "/dataset.jsonl"));
  REQUIRE(file_exists(dir + "/generation_manifest.json"));

  const std::string csv1 = read_text(dir + "/dataset.csv");
  auto rows = datagen::read_dataset_csv(dir + "/dataset.csv");
  CHECK(rows.size() >= 1400);

  // 17 columns: 15 schema fields + label + fraud_type
  const std::string header = csv1.substr(0, csv1.find('\n'));
  CHECK(std::count(header.begin(), header.end(), ',') == 16);

  const std::string dir2 = "cli_gen_test2";
  fs::remove_all(dir2);
  cmd_generate(cfg, dir2);
  CHECK(sha256_hex(csv1) == sha256_hex(read_text(dir2 + "/dataset.csv")));
  CHECK(sha256_hex(read_text(dir + "/dataset.jsonl")) ==
        sha256_hex(read_text(dir2 + "/dataset.jsonl")));

  // realized fraud rate within a tenth of a point of the target
  auto manifest = read_text(dir + "/generation_manifest.json");
  CHECK(manifest.find("realized_fraud_rate") != std::string::npos);
  fs::remove_all(dir);
  fs::remove_all(dir2);
}

TEST_CASE("cmd_train + cmd_evaluate + cmd_report end-to-end smoke") {
  namespace fs = std::filesystem;
  PipelineConfig cfg = smoke_config();
  cfg.pipeline.train.max_epochs = 2;
  cfg.pipeline.train.patience = 2;

  const std::string gen_dir = "cli_e2e_gen";
  const std::string run_dir = "cli_e2e_run";
  const std::string eval_dir = "cli_e2e_eval";
  fs::remove_all(gen_dir);
  fs::remove_all(run_dir);
  fs::remove_all(eval_dir);

  cmd_generate(cfg, gen_dir);
  cmd_train(cfg, gen_dir + "/dataset.csv", run_dir);

  REQUIRE(file_exists(run_dir + "/metrics.json"));
  REQUIRE(file_exists(run_dir + "/predictions.csv"));
  REQUIRE(file_exists(run_dir + "/artifact.json"));
  REQUIRE(file_exists(run_dir + "/tables/model_comparison.txt"));
  REQUIRE(file_exists(run_dir + "/tables/preprocessing.txt"));
  REQUIRE(file_exists(run_dir + "/tables/time_window.txt"));
  REQUIRE(file_exists(run_dir + "/tables/ablation.txt"));
  REQUIRE(file_exists(run_dir + "/activation_profile.csv"));

  // the preprocessing table carries all 3 variants
  const std::string prep = read_text(run_dir + "/tables/preprocessing.txt");
  CHECK(prep.find("no normalization") != std::string::npos);
  CHECK(prep.find("normalization+smote") != std::string::npos);

  // evaluate with the artifact on the training file reproduces the stored
  // final-fit in-sample metrics
  cmd_evaluate(run_dir + "/artifact.json", gen_dir + "/dataset.csv", eval_dir);
  REQUIRE(file_exists(eval_dir + "/evaluation.json"));
  auto in_sample = eval::run_report_from_json(read_text(run_dir + "/final_fit_metrics.json"));
  auto evaluated = eval::run_report_from_json(read_text(eval_dir + "/evaluation.json"));
  CHECK(evaluated.cv.moe_mean.f1 == doctest::Approx(in_sample.cv.moe_mean.f1));
  CHECK(evaluated.cv.moe_mean.auc == doctest::Approx(in_sample.cv.moe_mean.auc));

  // report regeneration is a pure function of the run directory
  cmd_report(run_dir);
  const std::string t1 = read_text(run_dir + "/tables/model_comparison.txt");
  const std::string w1 = read_text(run_dir + "/tables/expert_weights.txt");
  cmd_report(run_dir);
  CHECK(sha256_hex(t1) == sha256_hex(read_text(run_dir + "/tables/model_comparison.txt")));
  CHECK(sha256_hex(w1) == sha256_hex(read_text(run_dir + "/tables/expert_weights.txt")));

  fs::remove_all(gen_dir);
  fs::remove_all(run_dir);
  fs::remove_all(eval_dir);
}

TEST_CASE("subsample_by_cards keeps whole cards and both classes") {
  PipelineConfig cfg = smoke_config();
  auto corpus = datagen::generate_corpus(cfg.generator);
  auto small = subsample_by_cards(corpus, 0.3, 5);
  CHECK(small.size() < corpus.size());
  CHECK(small.size() > corpus.size() / 10);
  bool has_fraud = false, has_legit = false;
  std::set<std::int64_t> kept;
  for (const auto& r : small) {
    kept.insert(r.cardholder_id);
    (r.fraud ? has_fraud : has_legit) = true;
  }
  CHECK(has_fraud);
  CHECK(has_legit);
  // whole-card property: every kept card keeps all of its rows
  std::map<std::int64_t, std::size_t> full_counts, small_counts;
  for (const auto& r : corpus) full_counts[r.cardholder_id]++;
  for (const auto& r : small) small_counts[r.cardholder_id]++;
  for (const auto& [card, count] : small_counts)
    CHECK(count == full_counts[card]);
}
