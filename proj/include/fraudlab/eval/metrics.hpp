#pragma once

#include <cstdint>
#include <vector>

namespace fraudlab::eval {

struct ConfusionCounts {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t tn = 0;
  std::int64_t fn = 0;
  std::int64_t total() const { return tp + fp + tn + fn; }
};

struct ClassificationMetrics {
  ConfusionCounts counts;
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool precision_degenerate = false;  // no predicted positives
  bool recall_degenerate = false;     // no actual positives
};

// Predicted positive iff score >= threshold. Degenerate denominators yield 0
// with the corresponding flag set.
ClassificationMetrics confusion_metrics(const std::vector<double>& scores,
                                        const std::vector<int>& labels,
                                        double threshold);

// Mann-Whitney concordance P(score_pos > score_neg) + 0.5 P(equal), computed
// by the sorted-rank method with average ranks for ties.
double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels);

// AP = sum_k (R_k - R_{k-1}) * P_k over descending-score prefixes; tied
// scores are grouped and processed atomically.
double average_precision(const std::vector<double>& scores,
                         const std::vector<int>& labels);

// Fraction of ground-truth anomalous rows whose error exceeds tau.
double anomaly_detection_rate(const std::vector<double>& anomalous_errors,
                              double tau);

// Threshold maximizing F1 of (score >= threshold) over candidate cuts at the
// observed scores; returns the best threshold placed halfway between
// adjacent distinct scores where possible.
double best_f1_threshold(const std::vector<double>& scores,
                         const std::vector<int>& labels, double* best_f1 = nullptr);

}  // namespace fraudlab::eval
