#include "fraudlab/preprocess/sequences.hpp"

#include <algorithm>
#include <unordered_map>

namespace fraudlab::preprocess {

std::vector<SequenceWindow> build_sequences(const FeatureFrame& frame,
                                            std::int64_t window,
                                            std::int64_t window_days) {
  if (window < 1) throw data_error("build_sequences: window must be >= 1");
  const std::int64_t n = frame.rows();

  // per-card history in frame order (the frame is stream/time ordered)
  std::unordered_map<std::int64_t, std::vector<std::int64_t>> history;
  std::vector<SequenceWindow> out;
  out.reserve(static_cast<std::size_t>(n));
  const double horizon_h = static_cast<double>(window_days) * 24.0;

  for (std::int64_t i = 0; i < n; ++i) {
    auto& h = history[frame.cardholder_ids[static_cast<std::size_t>(i)]];
    h.push_back(i);

    SequenceWindow w;
    w.cardholder_id = frame.cardholder_ids[static_cast<std::size_t>(i)];
    w.label = frame.labels[static_cast<std::size_t>(i)];
    const std::int64_t take = std::min<std::int64_t>(window,
                                                     static_cast<std::int64_t>(h.size()));
    const double t_target = frame.times[static_cast<std::size_t>(i)];
    for (std::int64_t k = static_cast<std::int64_t>(h.size()) - take;
         k < static_cast<std::int64_t>(h.size()); ++k) {
      const std::int64_t row = h[static_cast<std::size_t>(k)];
      if (window_days > 0 && row != i &&
          frame.times[static_cast<std::size_t>(row)] < t_target - horizon_h)
        continue;  // outside the time lookback
      w.rows.push_back(row);
    }
    out.push_back(std::move(w));
  }
  return out;
}

void materialize_window(const SequenceWindow& w, const numerics::Tensor& X,
                        std::int64_t window, numerics::Tensor* out,
                        std::vector<double>* mask) {
  const std::int64_t d = X.dim(1);
  *out = numerics::Tensor({window, d});
  mask->assign(static_cast<std::size_t>(window), 0.0);
  const std::int64_t pad = window - w.real_length();
  for (std::int64_t t = 0; t < w.real_length(); ++t) {
    const std::int64_t row = w.rows[static_cast<std::size_t>(t)];
    std::copy(X.data() + row * d, X.data() + (row + 1) * d,
              out->data() + (pad + t) * d);
    (*mask)[static_cast<std::size_t>(pad + t)] = 1.0;
  }
}

}  // namespace fraudlab::preprocess
