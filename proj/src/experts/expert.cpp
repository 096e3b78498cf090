#include "fraudlab/experts/expert.hpp"

#include <algorithm>

namespace fraudlab::experts {

WindowBatch make_batch(const ModelData& data,
                       std::span<const std::size_t> window_ids,
                       std::int64_t window, unsigned needs) {
  WindowBatch b;
  b.size = static_cast<std::int64_t>(window_ids.size());
  b.window = window;
  const std::int64_t width = data.width();

  std::int64_t w_eff = 1;
  for (std::size_t id : window_ids)
    w_eff = std::max(w_eff, data.windows[id].real_length());
  b.w_eff = w_eff;

  const bool want_steps = needs & kNeedSteps;
  const bool want_flat = needs & kNeedFlat;
  const bool want_final = needs & kNeedFinalRows;
  const auto n_idx = data.index_cols.size();
  if (want_steps) {
    b.step_numeric.assign(static_cast<std::size_t>(w_eff),
                          numerics::Tensor({b.size, width}));
    b.step_indices.assign(n_idx, std::vector<std::vector<std::int64_t>>(
                                     static_cast<std::size_t>(w_eff),
                                     std::vector<std::int64_t>(
                                         static_cast<std::size_t>(b.size), 0)));
  }
  if (want_flat) {
    b.flat_numeric = numerics::Tensor({b.size * w_eff, width});
    b.flat_indices.assign(n_idx, std::vector<std::int64_t>(
                                     static_cast<std::size_t>(b.size * w_eff), 0));
    b.positions.assign(static_cast<std::size_t>(b.size * w_eff), 0);
  }
  b.mask = numerics::Tensor({b.size, w_eff});
  if (want_final) b.final_rows = numerics::Tensor({b.size, width});
  b.labels = numerics::Tensor({b.size, 1});

  for (std::int64_t i = 0; i < b.size; ++i) {
    const auto& w = data.windows[window_ids[static_cast<std::size_t>(i)]];
    const std::int64_t pad = w_eff - w.real_length();
    for (std::int64_t t = 0; t < w.real_length(); ++t) {
      const std::int64_t row = w.rows[static_cast<std::size_t>(t)];
      const std::int64_t step = pad + t;
      if (want_steps) {
        std::copy(data.X.data() + row * width, data.X.data() + (row + 1) * width,
                  b.step_numeric[static_cast<std::size_t>(step)].data() + i * width);
        for (std::size_t c = 0; c < n_idx; ++c)
          b.step_indices[c][static_cast<std::size_t>(step)][static_cast<std::size_t>(i)] =
              data.index_cols[c][static_cast<std::size_t>(row)];
      }
      if (want_flat) {
        std::copy(data.X.data() + row * width, data.X.data() + (row + 1) * width,
                  b.flat_numeric.data() + (i * w_eff + step) * width);
        for (std::size_t c = 0; c < n_idx; ++c)
          b.flat_indices[c][static_cast<std::size_t>(i * w_eff + step)] =
              data.index_cols[c][static_cast<std::size_t>(row)];
      }
      b.mask.at(i, step) = 1.0;
    }
    if (want_flat) {
      // absolute positions: the target transaction sits at window-1
      for (std::int64_t step = 0; step < w_eff; ++step)
        b.positions[static_cast<std::size_t>(i * w_eff + step)] =
            std::max<std::int64_t>(0, window - w_eff + step);
    }
    if (want_final) {
      const std::int64_t target = w.target_row();
      std::copy(data.X.data() + target * width,
                data.X.data() + (target + 1) * width, b.final_rows.data() + i * width);
    }
    b.labels.at(i, 0) = static_cast<double>(w.label);
  }
  return b;
}

void add_embedding_params(numerics::ParamSet& params,
                          const std::vector<std::int64_t>& vocab,
                          std::int64_t embed_dim, fraudlab::Rng& rng,
                          const std::string& prefix) {
  for (std::size_t c = 0; c < vocab.size(); ++c)
    params.add(prefix + ".embed" + std::to_string(c),
               numerics::glorot(vocab[c], embed_dim, rng));
}

numerics::Tensor expand_mask(const numerics::Tensor& mask, std::int64_t step,
                             std::int64_t width, bool invert) {
  const std::int64_t b = mask.dim(0);
  numerics::Tensor out({b, width});
  for (std::int64_t i = 0; i < b; ++i) {
    const double m = invert ? 1.0 - mask.at(i, step) : mask.at(i, step);
    for (std::int64_t j = 0; j < width; ++j) out.at(i, j) = m;
  }
  return out;
}

}  // namespace fraudlab::experts
