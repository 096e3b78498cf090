#pragma once

#include <vector>

namespace fraudlab::experts {

struct ThresholdCalibration {
  double tau = 0.0;
  double best_f1 = 0.0;
  double pr_auc = 0.0;
  bool degenerate = false;  // all errors identical
};

// Picks tau maximizing F1 of the rule (error > tau) over the finite set of
// observed errors, then centers tau halfway to the next distinct error so
// the cut sits between the two populations. Requires both classes.
ThresholdCalibration calibrate_anomaly_threshold(const std::vector<double>& errors,
                                                 const std::vector<int>& labels);

}  // namespace fraudlab::experts
