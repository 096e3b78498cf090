#include "fraudlab/experts/threshold.hpp"

#include <algorithm>

#include "fraudlab/common.hpp"
#include "fraudlab/eval/metrics.hpp"

namespace fraudlab::experts {

ThresholdCalibration calibrate_anomaly_threshold(const std::vector<double>& errors,
                                                 const std::vector<int>& labels) {
  if (errors.size() != labels.size())
    throw data_error("calibrate: errors/labels length mismatch");
  bool has_pos = false, has_neg = false;
  for (int y : labels) (y ? has_pos : has_neg) = true;
  if (!has_pos || !has_neg)
    throw data_error("calibrate: validation must contain both classes");

  std::vector<double> distinct = errors;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

  ThresholdCalibration out;
  out.pr_auc = eval::average_precision(errors, labels);
  if (distinct.size() == 1) {
    out.tau = distinct[0];
    out.degenerate = true;
    return out;
  }

  auto f1_at = [&](double tau) {
    std::int64_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < errors.size(); ++i) {
      const bool flagged = errors[i] > tau;
      if (flagged && labels[i])
        ++tp;
      else if (flagged && !labels[i])
        ++fp;
      else if (!flagged && labels[i])
        ++fn;
    }
    const double denom = static_cast<double>(2 * tp + fp + fn);
    return denom > 0.0 ? 2.0 * static_cast<double>(tp) / denom : 0.0;
  };

  double best_f1 = -1.0;
  std::size_t best_idx = 0;
  for (std::size_t i = 0; i < distinct.size(); ++i) {
    const double f1 = f1_at(distinct[i]);
    if (f1 > best_f1) {
      best_f1 = f1;
      best_idx = i;
    }
  }
  out.best_f1 = best_f1;
  out.tau = best_idx + 1 < distinct.size()
                ? 0.5 * (distinct[best_idx] + distinct[best_idx + 1])
                : distinct[best_idx];
  return out;
}

}  // namespace fraudlab::experts
