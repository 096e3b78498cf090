#pragma once

#include <string>
#include <vector>

#include "fraudlab/eval/cross_validate.hpp"

namespace fraudlab::eval {

// One named pipeline variant (preprocessing or time-window studies).
struct VariantResult {
  std::string name;
  MetricRow moe_mean;
  MetricRow lstm_mean;
  MetricRow transformer_mean;
};

// Everything a training run persists besides the model artifact.
struct RunReport {
  CvReport cv;
  std::vector<AblationRow> ablation;
  EntropyStudy entropy;
  std::vector<VariantResult> preprocessing_variants;  // no-norm / norm / norm+SMOTE
  std::vector<VariantResult> window_variants;         // 7 / 15 / 30 day lookback
  double decision_threshold = 0.5;
};

// ---- per-row prediction log --------------------------------------------
std::string predictions_to_csv(const std::vector<PredictionRow>& rows);
std::vector<PredictionRow> predictions_from_csv_text(const std::string& text);

// ---- machine-readable report -------------------------------------------
std::string run_report_to_json(const RunReport& report);
RunReport run_report_from_json(const std::string& text);

// ---- text tables ----------------------------------------------------------
// Every renderer is a pure function of its inputs; the report command
// recomputes Tables 1/6/8 and the complementarity list from the prediction
// log alone.
std::string render_model_comparison(const CvReport& cv);
std::string render_preprocessing_table(const std::vector<VariantResult>& variants);
std::string render_transaction_type_table(const std::vector<PredictionRow>& rows,
                                          double threshold);
std::string render_time_window_table(const std::vector<VariantResult>& variants);
std::string render_expert_weights(const moe::ActivationProfile& profile);
std::string render_ablation(const std::vector<AblationRow>& rows);
std::string render_complementarity(const ComplementaritySummary& summary);

// Recomputes per-fold and aggregate metrics purely from the prediction log.
CvReport cv_report_from_predictions(const std::vector<PredictionRow>& rows,
                                    double threshold);

}  // namespace fraudlab::eval
