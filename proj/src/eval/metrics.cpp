#include "fraudlab/eval/metrics.hpp"

#include <algorithm>
#include <numeric>

#include "fraudlab/common.hpp"

namespace fraudlab::eval {

ClassificationMetrics confusion_metrics(const std::vector<double>& scores,
                                        const std::vector<int>& labels,
                                        double threshold) {
  if (scores.size() != labels.size())
    throw data_error("confusion_metrics: scores/labels length mismatch");
  if (scores.empty()) throw data_error("confusion_metrics: empty input");
  ClassificationMetrics m;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool pred = scores[i] >= threshold;
    const bool truth = labels[i] != 0;
    if (pred && truth)
      m.counts.tp++;
    else if (pred && !truth)
      m.counts.fp++;
    else if (!pred && truth)
      m.counts.fn++;
    else
      m.counts.tn++;
  }
  const double n = static_cast<double>(m.counts.total());
  m.accuracy = static_cast<double>(m.counts.tp + m.counts.tn) / n;
  if (m.counts.tp + m.counts.fp == 0) {
    m.precision = 0.0;
    m.precision_degenerate = true;
  } else {
    m.precision = static_cast<double>(m.counts.tp) /
                  static_cast<double>(m.counts.tp + m.counts.fp);
  }
  if (m.counts.tp + m.counts.fn == 0) {
    m.recall = 0.0;
    m.recall_degenerate = true;
  } else {
    m.recall = static_cast<double>(m.counts.tp) /
               static_cast<double>(m.counts.tp + m.counts.fn);
  }
  m.f1 = (m.precision + m.recall) > 0.0
             ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
             : 0.0;
  return m;
}

double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size())
    throw data_error("roc_auc: scores/labels length mismatch");
  const auto n = scores.size();
  std::int64_t n_pos = 0;
  for (int y : labels) n_pos += y ? 1 : 0;
  const std::int64_t n_neg = static_cast<std::int64_t>(n) - n_pos;
  if (n_pos == 0 || n_neg == 0) throw data_error("roc_auc: single-class input");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // average ranks over tie groups, 1-based
  double rank_sum_pos = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j + 1);
    for (std::size_t k = i; k <= j; ++k)
      if (labels[order[k]]) rank_sum_pos += avg_rank;
    i = j + 1;
  }
  const double u = rank_sum_pos -
                   static_cast<double>(n_pos) * (static_cast<double>(n_pos) + 1.0) / 2.0;
  return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double average_precision(const std::vector<double>& scores,
                         const std::vector<int>& labels) {
  if (scores.size() != labels.size())
    throw data_error("average_precision: scores/labels length mismatch");
  std::int64_t n_pos = 0;
  for (int y : labels) n_pos += y ? 1 : 0;
  if (n_pos == 0) throw data_error("average_precision: no positives");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  double ap = 0.0;
  double recall_prev = 0.0;
  std::int64_t tp = 0, fp = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
    for (std::size_t k = i; k <= j; ++k) {
      if (labels[order[k]])
        ++tp;
      else
        ++fp;
    }
    const double recall = static_cast<double>(tp) / static_cast<double>(n_pos);
    const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    ap += (recall - recall_prev) * precision;
    recall_prev = recall;
    i = j + 1;
  }
  return ap;
}

double anomaly_detection_rate(const std::vector<double>& anomalous_errors,
                              double tau) {
  if (anomalous_errors.empty())
    throw data_error("anomaly_detection_rate: empty anomalous subset");
  std::int64_t hits = 0;
  for (double e : anomalous_errors) hits += e > tau ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(anomalous_errors.size());
}

double best_f1_threshold(const std::vector<double>& scores,
                         const std::vector<int>& labels, double* best_f1) {
  std::vector<double> distinct = scores;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  double best_t = distinct.front();
  double best = -1.0;
  for (double t : distinct) {
    const auto m = confusion_metrics(scores, labels, t);
    if (m.f1 > best) {
      best = m.f1;
      best_t = t;
    }
  }
  if (best_f1) *best_f1 = best;
  return best_t;
}

}  // namespace fraudlab::eval
