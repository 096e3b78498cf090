#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fraudlab/datagen/schema.hpp"
#include "fraudlab/eval/metrics.hpp"
#include "fraudlab/experts/autoencoder.hpp"
#include "fraudlab/experts/lstm.hpp"
#include "fraudlab/experts/training.hpp"
#include "fraudlab/experts/transformer.hpp"
#include "fraudlab/moe/gate.hpp"
#include "fraudlab/preprocess/frame.hpp"
#include "fraudlab/preprocess/scaler.hpp"

namespace fraudlab::eval {

struct PipelineOptions {
  int k_folds = 5;
  std::int64_t window = 10;
  std::int64_t window_days = 30;
  bool normalize = true;
  bool smote = true;
  double smote_ratio = 0.25;  // post-SMOTE minority : majority on the fit split
  int smote_k = 5;
  int cardinality_threshold = 16;
  double gate_lambda = 0.01;
  bool gate_on_expert_outputs = false;
  double decision_threshold = 0.5;
  double val_fraction = 0.15;  // share of fit-split cards held out for early stop
  experts::TrainConfig train;
  experts::LstmConfig lstm;
  experts::TransformerConfig transformer;
  experts::AutoencoderConfig autoencoder;
  std::uint64_t seed = 42;
  int threads = 0;  // 0 = FRAUDLAB_THREADS / hardware
};

// One model's metric bundle; NaN-free, N/A encoded via flags.
struct MetricRow {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double auc = 0.0;
  double ap = 0.0;
  double anomaly_rate = 0.0;
  bool classification_na = false;
  bool anomaly_na = true;
};

struct PredictionRow {
  std::int64_t row_id = 0;  // index into the corpus
  int fold = -1;
  double y = 0.0;
  double g[3] = {0, 0, 0};
  double e[3] = {0, 0, 0};
  int label = 0;
  datagen::FraudType fraud_type = datagen::FraudType::None;
  datagen::TransactionType tx_type = datagen::TransactionType::Purchase;
};

struct FoldReport {
  int fold = -1;
  MetricRow moe, lstm, transformer, autoencoder;
  double tau = 0.0;
  double ae_calibration_f1 = 0.0;
  double f1max_threshold = 0.5;
  double f1_at_f1max = 0.0;
  double gate_entropy = 0.0;
  int lstm_best_epoch = 0, transformer_best_epoch = 0, ae_best_epoch = 0,
      gate_best_epoch = 0;
  std::string expert_digest_before_gate;
  std::string expert_digest_after_gate;
  // leakage audit: the exact row ids used by every fit call
  std::vector<std::int64_t> scaler_fit_rows;
  std::vector<std::int64_t> smote_input_rows;
  std::vector<std::int64_t> class_weight_rows;
  std::vector<std::int64_t> test_rows;
};

struct ComplementaritySummary {
  std::int64_t count = 0;  // all experts wrong at 0.5, MoE right
  std::vector<PredictionRow> exemplars;  // up to 20
};

struct CvReport {
  std::vector<FoldReport> folds;
  MetricRow moe_mean, moe_sd;
  MetricRow lstm_mean, lstm_sd;
  MetricRow transformer_mean, transformer_sd;
  MetricRow autoencoder_mean, autoencoder_sd;
  moe::ActivationProfile profile;  // over all held-out predictions
  std::vector<PredictionRow> predictions;
  ComplementaritySummary complementarity;
  double mean_gate_entropy = 0.0;
};

// Cached per-fold gate data so ablations and entropy studies can retrain the
// gate without touching the (frozen) experts.
struct FoldArtifacts {
  int fold = -1;
  moe::GateData fit, val, test;
  std::vector<std::int64_t> test_row_ids;
  std::vector<datagen::FraudType> test_fraud_types;
  std::vector<int> test_labels;
  double tau = 0.0;
  double w_pos = 1.0, w_neg = 1.0;
  experts::LossWeights weights;
  std::vector<double> test_ae_errors;
};

CvReport cross_validate(const std::vector<datagen::TransactionRecord>& corpus,
                        const PipelineOptions& options,
                        std::vector<FoldArtifacts>* keep_artifacts = nullptr);

struct AblationRow {
  std::string removed;         // expert name
  MetricRow metrics;           // ablated ensemble over all test rows
  double delta_f1 = 0.0;       // full - ablated
  double delta_recall = 0.0;
  double outlier_recall = 0.0;  // recall on the fraud_type == Other subset
  double delta_outlier_recall = 0.0;
};

// Retrains the gate over each 2-expert subset of the frozen experts and
// reports metric deltas against the full ensemble.
std::vector<AblationRow> ablation_run(const CvReport& full,
                                      const std::vector<FoldArtifacts>& artifacts,
                                      const PipelineOptions& options);

struct EntropyStudy {
  double mean_entropy_regularized = 0.0;   // gate trained at options lambda
  double mean_entropy_unregularized = 0.0;  // same seed, lambda = 0
};

EntropyStudy entropy_study(const std::vector<FoldArtifacts>& artifacts,
                           const PipelineOptions& options);

// Full-data fit used for the exported model artifact.
struct TrainedPipeline {
  preprocess::CategoricalEncoding encoding;
  preprocess::ScalerStats scaler;
  bool normalize = true;
  std::int64_t window = 10;
  std::int64_t window_days = 30;
  std::unique_ptr<experts::LstmExpert> lstm;
  std::unique_ptr<experts::TransformerExpert> transformer;
  std::unique_ptr<experts::AutoencoderExpert> autoencoder;
  std::unique_ptr<moe::GateNetwork> gate;
  double tau = 0.0;
  double w_pos = 1.0, w_neg = 1.0;
  // training metadata
  experts::TrainResult lstm_curve, transformer_curve, ae_curve, gate_curve;
};

TrainedPipeline fit_full(const std::vector<datagen::TransactionRecord>& corpus,
                         const PipelineOptions& options);

// Scores a dataset with a trained pipeline; fills a CvReport-style summary
// with fold -1 predictions.
CvReport evaluate_pipeline(const TrainedPipeline& model,
                           const std::vector<datagen::TransactionRecord>& corpus,
                           const PipelineOptions& options);

}  // namespace fraudlab::eval
