#pragma once

#include <cstdint>
#include <vector>

#include "fraudlab/numerics/tensor.hpp"
#include "fraudlab/preprocess/frame.hpp"

namespace fraudlab::preprocess {

// Fixed-length trailing window over one card's history. Row indices point
// into the frame, oldest first, ending at the target transaction; windows
// shorter than W are implicitly left-padded with zero rows.
struct SequenceWindow {
  std::int64_t cardholder_id = 0;
  std::vector<std::int64_t> rows;  // 1..W frame row indices, time order
  int label = 0;                   // label of the final transaction

  std::int64_t real_length() const { return static_cast<std::int64_t>(rows.size()); }
  std::int64_t target_row() const { return rows.back(); }
};

// One window per frame row: the transaction plus up to W-1 same-card
// predecessors. window_days > 0 additionally drops predecessors older than
// that many days relative to the target transaction.
std::vector<SequenceWindow> build_sequences(const FeatureFrame& frame,
                                            std::int64_t window,
                                            std::int64_t window_days = 0);

// Left-padded (W x width) feature block plus a {0,1} step mask.
void materialize_window(const SequenceWindow& w, const numerics::Tensor& X,
                        std::int64_t window, numerics::Tensor* out,
                        std::vector<double>* mask);

}  // namespace fraudlab::preprocess
