#include "fraudlab/experts/autoencoder.hpp"

#include <algorithm>

#include "fraudlab/rng.hpp"

namespace fraudlab::experts {

using numerics::Graph;
using numerics::Tensor;
using numerics::Var;

AutoencoderExpert::AutoencoderExpert(std::int64_t width, AutoencoderConfig config,
                                     std::uint64_t seed)
    : config_(config), width_(width) {
  if (config_.bottleneck >= width)
    throw data_error("autoencoder: bottleneck must be strictly below input width");
  if (config_.hidden < config_.bottleneck)
    throw data_error("autoencoder: hidden layer narrower than bottleneck");
  Rng rng(derive_seed(seed, 0xAE00));
  params_.add("ae.w1", numerics::glorot(width, config_.hidden, rng));
  params_.add("ae.b1", Tensor({config_.hidden}));
  params_.add("ae.w2", numerics::glorot(config_.hidden, config_.bottleneck, rng));
  params_.add("ae.b2", Tensor({config_.bottleneck}));
  params_.add("ae.w3", numerics::glorot(config_.bottleneck, config_.hidden, rng));
  params_.add("ae.b3", Tensor({config_.hidden}));
  params_.add("ae.w4", numerics::glorot(config_.hidden, width, rng));
  params_.add("ae.b4", Tensor({width}));
}

std::vector<Var> AutoencoderExpert::bind(Graph& g, bool trainable) const {
  std::vector<Var> vars;
  vars.reserve(params_.blocks.size());
  for (const auto& blk : params_.blocks)
    vars.push_back(trainable ? g.param(blk.value) : g.constant(blk.value));
  return vars;
}

Var AutoencoderExpert::row_errors(Graph& g, Var rows,
                                  const std::vector<Var>& v) const {
  Var e1 = g.tanh_act(g.add_bias(g.matmul(rows, v[0]), v[1]));
  Var z = g.tanh_act(g.add_bias(g.matmul(e1, v[2]), v[3]));
  Var d1 = g.tanh_act(g.add_bias(g.matmul(z, v[4]), v[5]));
  Var recon = g.add_bias(g.matmul(d1, v[6]), v[7]);
  Var diff = g.add(recon, g.scale(rows, -1.0));
  Var sq = g.mul(diff, diff);
  return g.scale(g.sum_last(sq), 1.0 / static_cast<double>(width_));
}

Var AutoencoderExpert::batch_loss(Graph& g, const WindowBatch& batch, double,
                                  double, std::vector<Var>* bound) {
  std::vector<Var> vars = bind(g, /*trainable=*/true);
  if (bound) *bound = vars;
  Var rows = g.constant(batch.final_rows);
  return g.mean_all(row_errors(g, rows, vars));
}

std::vector<double> AutoencoderExpert::errors_for_rows(const Tensor& rows) const {
  Graph g;
  std::vector<Var> vars = bind(g, /*trainable=*/false);
  Var err = row_errors(g, g.constant(rows), vars);
  const Tensor& v = err.value();
  return v.vec();
}

std::vector<double> AutoencoderExpert::score(
    const ModelData& data, std::span<const std::size_t> window_ids,
    std::int64_t batch_size) const {
  std::vector<double> out;
  out.reserve(window_ids.size());
  const std::int64_t d = data.width();
  for (std::size_t start = 0; start < window_ids.size();
       start += static_cast<std::size_t>(batch_size)) {
    const auto count = std::min<std::size_t>(static_cast<std::size_t>(batch_size),
                                             window_ids.size() - start);
    Tensor rows({static_cast<std::int64_t>(count), d});
    for (std::size_t i = 0; i < count; ++i) {
      const auto& w = data.windows[window_ids[start + i]];
      std::copy(data.X.data() + w.target_row() * d,
                data.X.data() + (w.target_row() + 1) * d,
                rows.data() + static_cast<std::int64_t>(i) * d);
    }
    auto errs = errors_for_rows(rows);
    out.insert(out.end(), errs.begin(), errs.end());
  }
  return out;
}

double AutoencoderExpert::pseudo_probability(double error) const {
  if (tau_ <= 0.0) return std::min(1.0, error);
  const double scaled = std::min(1.0, error / tau_) * 0.5;
  return scaled + (error > tau_ ? 0.5 : 0.0);
}

}  // namespace fraudlab::experts
