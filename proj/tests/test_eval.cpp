#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "fraudlab/datagen/generator.hpp"
#include "fraudlab/eval/cross_validate.hpp"
#include "fraudlab/eval/metrics.hpp"
#include "fraudlab/eval/reports.hpp"
#include "fraudlab/rng.hpp"
#include "fraudlab/sha256.hpp"

using namespace fraudlab;
using namespace fraudlab::eval;

namespace {

// O(n^2) pairwise concordance oracle
double roc_auc_brute(const std::vector<double>& scores, const std::vector<int>& labels) {
  double num = 0.0;
  std::int64_t pairs = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!labels[i]) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j]) continue;
      ++pairs;
      if (scores[i] > scores[j])
        num += 1.0;
      else if (scores[i] == scores[j])
        num += 0.5;
    }
  }
  return num / static_cast<double>(pairs);
}

// exhaustive prefix-sweep oracle with grouped ties
double ap_brute(const std::vector<double>& scores, const std::vector<int>& labels) {
  std::vector<double> cuts = scores;
  std::sort(cuts.begin(), cuts.end(), std::greater<>());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  std::int64_t n_pos = 0;
  for (int y : labels) n_pos += y;
  double ap = 0.0, r_prev = 0.0;
  for (double c : cuts) {
    std::int64_t tp = 0, fp = 0;
    for (std::size_t i = 0; i < scores.size(); ++i)
      if (scores[i] >= c) (labels[i] ? tp : fp)++;
    const double r = static_cast<double>(tp) / static_cast<double>(n_pos);
    const double p = static_cast<double>(tp) / static_cast<double>(tp + fp);
    ap += (r - r_prev) * p;
    r_prev = r;
  }
  return ap;
}

datagen::GeneratorConfig smoke_config(std::uint64_t seed) {
  datagen::GeneratorConfig cfg;
  cfg.corpus_size = 1500;
  cfg.n_accounts = 120;
  cfg.horizon_days = 15;
  cfg.fraud_rate = 0.05;
  cfg.seed = seed;
  return cfg;
}

PipelineOptions smoke_options(std::uint64_t seed) {
  PipelineOptions opt;
  opt.k_folds = 2;
  opt.window = 5;
  opt.window_days = 30;
  opt.lstm = {.hidden = 8, .embed_dim = 2};
  opt.transformer = {.d_model = 8, .heads = 2, .ffn = 16, .embed_dim = 2, .window = 5};
  opt.autoencoder = {.hidden = 12, .bottleneck = 4};
  opt.train.batch_size = 128;
  opt.train.max_epochs = 4;
  opt.train.patience = 4;
  opt.seed = seed;
  return opt;
}

}  // namespace

TEST_CASE("confusion_metrics: frozen examples and degenerate rules") {
  {
    auto m = confusion_metrics({0.99, 0.8, 0.7, 0.2}, {1, 1, 1, 0}, 0.5);
    CHECK(m.accuracy == 1.0);
    CHECK(m.precision == 1.0);
    CHECK(m.recall == 1.0);
    CHECK(m.f1 == 1.0);
  }
  {
    // all-negative predictions on mixed labels
    auto m = confusion_metrics({0.1, 0.2, 0.3}, {1, 0, 1}, 0.5);
    CHECK(m.recall == 0.0);
    CHECK(m.precision == 0.0);
    CHECK(m.precision_degenerate);
  }
  {
    // hand count: tp=1 fp=1 fn=1 tn=1
    auto m = confusion_metrics({0.9, 0.8, 0.4, 0.3}, {1, 0, 1, 0}, 0.5);
    CHECK(m.counts.tp == 1);
    CHECK(m.counts.fp == 1);
    CHECK(m.counts.fn == 1);
    CHECK(m.counts.tn == 1);
    CHECK(m.precision == doctest::Approx(0.5));
    CHECK(m.recall == doctest::Approx(0.5));
    CHECK(m.f1 == doctest::Approx(0.5));
    CHECK(m.f1 == doctest::Approx(2.0 * m.precision * m.recall /
                                  (m.precision + m.recall)));
  }
  CHECK_THROWS_AS(confusion_metrics({0.5}, {1, 0}, 0.5), Error);
}

TEST_CASE("roc_auc: trivial values and brute-force oracle with ties") {
  CHECK(roc_auc({0.9, 0.8, 0.1, 0.2}, {1, 1, 0, 0}) == 1.0);
  CHECK(roc_auc({0.5, 0.5, 0.5, 0.5}, {1, 0, 1, 0}) == 0.5);
  CHECK_THROWS_AS(roc_auc({0.5, 0.6}, {1, 1}), Error);

  Rng rng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 5 + rng.below(196);
    std::vector<double> scores;
    std::vector<int> labels;
    bool heavy_ties = trial % 2 == 0;
    std::int64_t pos = 0;
    for (std::size_t i = 0; i < n; ++i) {
      scores.push_back(heavy_ties ? std::floor(rng.uniform() * 8.0) / 8.0
                                  : rng.uniform());
      const int y = rng.uniform() < 0.35 ? 1 : 0;
      labels.push_back(y);
      pos += y;
    }
    if (pos == 0) labels[0] = 1;
    if (pos == static_cast<std::int64_t>(n)) labels[0] = 0;
    CHECK(std::abs(roc_auc(scores, labels) - roc_auc_brute(scores, labels)) <= 1e-12);
    // label-flip complement property
    std::vector<int> flipped;
    for (int y : labels) flipped.push_back(1 - y);
    CHECK(std::abs(roc_auc(scores, labels) + roc_auc(scores, flipped) - 1.0) <= 1e-12);
  }
}

TEST_CASE("average_precision: trivial placements and sweep oracle") {
  {
    std::vector<double> s{9, 8, 7, 6, 5, 4, 3, 2, 1, 0};
    std::vector<int> y(10, 0);
    y[0] = 1;
    CHECK(average_precision(s, y) == doctest::Approx(1.0));
    std::vector<int> last(10, 0);
    last[9] = 1;
    CHECK(average_precision(s, last) == doctest::Approx(0.1));
  }
  CHECK_THROWS_AS(average_precision({0.5, 0.2}, {0, 0}), Error);

  Rng rng(515);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 5 + rng.below(196);
    std::vector<double> scores;
    std::vector<int> labels;
    std::int64_t pos = 0;
    for (std::size_t i = 0; i < n; ++i) {
      scores.push_back(trial % 2 ? rng.uniform()
                                 : std::floor(rng.uniform() * 6.0) / 6.0);
      const int y = rng.uniform() < 0.3 ? 1 : 0;
      labels.push_back(y);
      pos += y;
    }
    if (pos == 0) labels[0] = 1;
    CHECK(std::abs(average_precision(scores, labels) - ap_brute(scores, labels)) <=
          1e-12);
  }
}

TEST_CASE("anomaly_detection_rate: boundary behavior") {
  CHECK(anomaly_detection_rate({0.9, 0.8, 0.7}, 0.5) == 1.0);
  CHECK(anomaly_detection_rate({0.9, 0.8, 0.7},
                               std::numeric_limits<double>::infinity()) == 0.0);
  CHECK(anomaly_detection_rate({0.9, 0.1}, 0.5) == doctest::Approx(0.5));
  CHECK_THROWS_AS(anomaly_detection_rate({}, 0.5), Error);
}

TEST_CASE("cross_validate smoke: report complete, leakage-free, frozen experts") {
  auto corpus = datagen::generate_corpus(smoke_config(900));
  PipelineOptions opt = smoke_options(900);
  std::vector<FoldArtifacts> artifacts;
  CvReport report = cross_validate(corpus, opt, &artifacts);

  REQUIRE(report.folds.size() == 2);
  REQUIRE(artifacts.size() == 2);

  std::size_t covered = 0;
  for (const auto& f : report.folds) {
    covered += f.test_rows.size();
    // leakage guard: no test row ever entered a fit call
    std::set<std::int64_t> test(f.test_rows.begin(), f.test_rows.end());
    for (std::int64_t r : f.scaler_fit_rows) CHECK(test.count(r) == 0);
    for (std::int64_t r : f.smote_input_rows) CHECK(test.count(r) == 0);
    for (std::int64_t r : f.class_weight_rows) CHECK(test.count(r) == 0);
    // freeze contract
    CHECK(f.expert_digest_before_gate == f.expert_digest_after_gate);
    CHECK_FALSE(f.expert_digest_before_gate.empty());
    CHECK(f.tau > 0.0);
    // filled metric fields
    CHECK(f.moe.auc > 0.0);
    CHECK(f.lstm.auc > 0.0);
    CHECK(f.transformer.auc > 0.0);
    CHECK_FALSE(f.autoencoder.anomaly_na);
  }
  // folds partition the corpus
  CHECK(covered == corpus.size());
  CHECK(report.predictions.size() == corpus.size());

  // aggregate equals recomputed mean of per-fold accuracies
  double mean_acc = 0.0;
  for (const auto& f : report.folds) mean_acc += f.moe.accuracy;
  mean_acc /= static_cast<double>(report.folds.size());
  CHECK(report.moe_mean.accuracy == doctest::Approx(mean_acc).epsilon(1e-12));

  // convexity bound holds for every prediction
  for (const auto& p : report.predictions) {
    const double lo = std::min({p.e[0], p.e[1], p.e[2]});
    const double hi = std::max({p.e[0], p.e[1], p.e[2]});
    CHECK(p.y >= lo - 1e-12);
    CHECK(p.y <= hi + 1e-12);
    const double gsum = p.g[0] + p.g[1] + p.g[2];
    CHECK(std::abs(gsum - 1.0) <= 1e-9);
  }

  // complementarity count matches an independent recount
  std::int64_t recount = 0;
  for (const auto& p : report.predictions) {
    bool all_wrong = true;
    for (double e : p.e)
      if ((e >= 0.5) == (p.label != 0)) all_wrong = false;
    if (all_wrong && (p.y >= 0.5) == (p.label != 0)) ++recount;
  }
  CHECK(recount == report.complementarity.count);

  SUBCASE("ablation produces exactly three rows over frozen artifacts") {
    auto rows = ablation_run(report, artifacts, opt);
    REQUIRE(rows.size() == 3);
    std::set<std::string> names;
    for (const auto& r : rows) {
      names.insert(r.removed);
      CHECK(std::isfinite(r.metrics.f1));
      CHECK(std::isfinite(r.delta_outlier_recall));
    }
    CHECK(names == std::set<std::string>{"rnn", "transformer", "autoencoder"});
  }

  SUBCASE("entropy study produces finite entropies") {
    auto study = entropy_study(artifacts, opt);
    CHECK(study.mean_entropy_regularized >= 0.0);
    CHECK(study.mean_entropy_unregularized >= 0.0);
    CHECK(study.mean_entropy_regularized <= std::log(3.0) + 1e-9);
  }

  SUBCASE("prediction log round trip and pure-function report regeneration") {
    const std::string csv = predictions_to_csv(report.predictions);
    auto loaded = predictions_from_csv_text(csv);
    REQUIRE(loaded.size() == report.predictions.size());
    CHECK(predictions_to_csv(loaded) == csv);

    CvReport from_log = cv_report_from_predictions(loaded, opt.decision_threshold);
    CHECK(from_log.folds.size() == report.folds.size());
    CHECK(from_log.moe_mean.accuracy ==
          doctest::Approx(report.moe_mean.accuracy).epsilon(1e-3));
    CHECK(from_log.moe_mean.auc == doctest::Approx(report.moe_mean.auc).epsilon(1e-3));
    CHECK(from_log.complementarity.count == report.complementarity.count);

    // regeneration is digest-stable
    const std::string t1 = render_model_comparison(from_log) +
                           render_transaction_type_table(loaded, 0.5) +
                           render_expert_weights(from_log.profile);
    const std::string t2 = render_model_comparison(
                               cv_report_from_predictions(loaded, 0.5)) +
                           render_transaction_type_table(loaded, 0.5) +
                           render_expert_weights(from_log.profile);
    CHECK(sha256_hex(t1) == sha256_hex(t2));
  }
}

TEST_CASE("cross_validate determinism: identical seed gives identical predictions") {
  auto corpus = datagen::generate_corpus(smoke_config(41));
  PipelineOptions opt = smoke_options(41);
  opt.train.max_epochs = 2;
  CvReport a = cross_validate(corpus, opt);
  CvReport b = cross_validate(corpus, opt);
  CHECK(predictions_to_csv(a.predictions) == predictions_to_csv(b.predictions));
  CHECK(a.moe_mean.f1 == b.moe_mean.f1);
}

TEST_CASE("fit_full + evaluate_pipeline reproduce in-sample metrics") {
  auto corpus = datagen::generate_corpus(smoke_config(77));
  PipelineOptions opt = smoke_options(77);
  opt.train.max_epochs = 2;
  TrainedPipeline model = fit_full(corpus, opt);
  CHECK(model.tau > 0.0);
  CvReport r1 = evaluate_pipeline(model, corpus, opt);
  CvReport r2 = evaluate_pipeline(model, corpus, opt);
  CHECK(r1.moe_mean.f1 == r2.moe_mean.f1);
  CHECK(r1.predictions.size() == corpus.size());
}

TEST_CASE("run report json round trip") {
  RunReport r;
  FoldReport f;
  f.fold = 0;
  f.moe.accuracy = 0.97;
  f.moe.anomaly_na = false;
  f.tau = 0.12;
  f.expert_digest_before_gate = "abc";
  f.expert_digest_after_gate = "abc";
  r.cv.folds.push_back(f);
  r.cv.moe_mean = f.moe;
  r.entropy.mean_entropy_regularized = 0.9;
  r.entropy.mean_entropy_unregularized = 0.4;
  AblationRow ab;
  ab.removed = "autoencoder";
  ab.delta_outlier_recall = 0.05;
  r.ablation.push_back(ab);
  VariantResult v;
  v.name = "normalization+smote";
  v.moe_mean.f1 = 0.8;
  r.preprocessing_variants.push_back(v);

  const std::string json = run_report_to_json(r);
  RunReport back = run_report_from_json(json);
  CHECK(back.cv.folds.size() == 1);
  CHECK(back.cv.folds[0].tau == doctest::Approx(0.12));
  CHECK(back.ablation.size() == 1);
  CHECK(back.ablation[0].removed == "autoencoder");
  CHECK(back.preprocessing_variants[0].name == "normalization+smote");
  CHECK(run_report_to_json(back) == json);
}
