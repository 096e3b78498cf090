#include "fraudlab/experts/lstm.hpp"

#include "fraudlab/rng.hpp"

namespace fraudlab::experts {

using numerics::Graph;
using numerics::Tensor;
using numerics::Var;

LstmExpert::LstmExpert(std::int64_t numeric_width,
                       std::vector<std::int64_t> index_vocab, LstmConfig config,
                       std::uint64_t seed)
    : config_(config), numeric_width_(numeric_width),
      index_vocab_(std::move(index_vocab)) {
  Rng rng(derive_seed(seed, 0x157f));
  const std::int64_t f =
      numeric_width_ +
      static_cast<std::int64_t>(index_vocab_.size()) * config_.embed_dim;
  const std::int64_t h = config_.hidden;
  params_.add("lstm.wx", numerics::glorot(f, 4 * h, rng));
  params_.add("lstm.wh", numerics::glorot(h, 4 * h, rng));
  Tensor bias({4 * h});
  for (std::int64_t j = h; j < 2 * h; ++j) bias[j] = 1.0;  // forget gate
  params_.add("lstm.b", std::move(bias));
  params_.add("lstm.w_out", numerics::glorot(h, 1, rng));
  params_.add("lstm.b_out", Tensor({1}));
  add_embedding_params(params_, index_vocab_, config_.embed_dim, rng, "lstm");
}

Var LstmExpert::probability(Graph& g, const WindowBatch& batch,
                            std::vector<Var>* bound, bool trainable) const {
  std::vector<Var> vars;
  vars.reserve(params_.blocks.size());
  for (const auto& blk : params_.blocks)
    vars.push_back(trainable ? g.param(blk.value) : g.constant(blk.value));
  if (bound) *bound = vars;

  const Var wx = vars[0], wh = vars[1], b = vars[2], w_out = vars[3], b_out = vars[4];
  const std::size_t embed_base = 5;
  const std::int64_t h = config_.hidden;
  const std::int64_t bsz = batch.size;

  Var hidden = g.constant(Tensor({bsz, h}));
  Var cell = g.constant(Tensor({bsz, h}));

  for (std::int64_t t = 0; t < batch.w_eff; ++t) {
    std::vector<Var> parts;
    parts.push_back(g.constant(batch.step_numeric[static_cast<std::size_t>(t)]));
    for (std::size_t c = 0; c < index_vocab_.size(); ++c)
      parts.push_back(g.gather_rows(vars[embed_base + c],
                                    batch.step_indices[c][static_cast<std::size_t>(t)]));
    Var x = parts.size() > 1 ? g.concat(parts) : parts[0];

    Var z = g.add_bias(g.add(g.matmul(x, wx), g.matmul(hidden, wh)), b);
    Var gate_i = g.sigmoid(g.slice_cols(z, 0, h));
    Var gate_f = g.sigmoid(g.slice_cols(z, h, h));
    Var gate_o = g.sigmoid(g.slice_cols(z, 2 * h, h));
    Var cand = g.tanh_act(g.slice_cols(z, 3 * h, h));

    Var c_new = g.add(g.mul(gate_f, cell), g.mul(gate_i, cand));
    Var h_new = g.mul(gate_o, g.tanh_act(c_new));

    // padded steps keep the previous state
    Var keep = g.constant(expand_mask(batch.mask, t, h, false));
    Var hold = g.constant(expand_mask(batch.mask, t, h, true));
    cell = g.add(g.mul(keep, c_new), g.mul(hold, cell));
    hidden = g.add(g.mul(keep, h_new), g.mul(hold, hidden));
  }

  return g.sigmoid(g.add_bias(g.matmul(hidden, w_out), b_out));
}

Var LstmExpert::batch_loss(Graph& g, const WindowBatch& batch, double w_pos,
                           double w_neg, std::vector<Var>* bound) {
  Var p = probability(g, batch, bound, /*trainable=*/true);
  return g.mean_all(g.weighted_bce(p, batch.labels, w_pos, w_neg));
}

std::vector<double> LstmExpert::score(const ModelData& data,
                                      std::span<const std::size_t> window_ids,
                                      std::int64_t batch_size) const {
  std::vector<double> out;
  out.reserve(window_ids.size());
  for (std::size_t start = 0; start < window_ids.size();
       start += static_cast<std::size_t>(batch_size)) {
    const auto count = std::min<std::size_t>(static_cast<std::size_t>(batch_size),
                                             window_ids.size() - start);
    // positions are unused by the LSTM, so window 0 is fine here
    WindowBatch batch = make_batch(data, window_ids.subspan(start, count), 0, kNeedSteps);
    Graph g;
    Var p = probability(g, batch, nullptr, /*trainable=*/false);
    const Tensor& v = p.value();
    for (std::int64_t i = 0; i < v.numel(); ++i) out.push_back(v[i]);
  }
  return out;
}

}  // namespace fraudlab::experts
