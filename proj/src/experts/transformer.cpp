#include "fraudlab/experts/transformer.hpp"

#include <array>
#include <cmath>

#include "fraudlab/rng.hpp"

namespace fraudlab::experts {

using numerics::Graph;
using numerics::Tensor;
using numerics::Var;

TransformerExpert::TransformerExpert(std::int64_t numeric_width,
                                     std::vector<std::int64_t> index_vocab,
                                     TransformerConfig config, std::uint64_t seed)
    : config_(config), numeric_width_(numeric_width),
      index_vocab_(std::move(index_vocab)) {
  if (config_.d_model % config_.heads != 0)
    throw data_error("transformer: head count must divide model width");
  Rng rng(derive_seed(seed, 0x7f02));
  const std::int64_t f =
      numeric_width_ +
      static_cast<std::int64_t>(index_vocab_.size()) * config_.embed_dim;
  const std::int64_t d = config_.d_model;
  const std::int64_t dk = d / config_.heads;

  params_.add("tf.w_in", numerics::glorot(f, d, rng));
  params_.add("tf.b_in", Tensor({d}));
  params_.add("tf.pos", numerics::glorot(config_.window, d, rng));
  for (std::int64_t h = 0; h < config_.heads; ++h) {
    const std::string tag = "tf.h" + std::to_string(h);
    params_.add(tag + ".wq", numerics::glorot(d, dk, rng));
    params_.add(tag + ".wk", numerics::glorot(d, dk, rng));
    params_.add(tag + ".wv", numerics::glorot(d, dk, rng));
  }
  params_.add("tf.w_o", numerics::glorot(d, d, rng));
  params_.add("tf.b_o", Tensor({d}));
  params_.add("tf.ln1.gamma", Tensor::full({d}, 1.0));
  params_.add("tf.ln1.beta", Tensor({d}));
  params_.add("tf.ffn.w1", numerics::glorot(d, config_.ffn, rng));
  params_.add("tf.ffn.b1", Tensor({config_.ffn}));
  params_.add("tf.ffn.w2", numerics::glorot(config_.ffn, d, rng));
  params_.add("tf.ffn.b2", Tensor({d}));
  params_.add("tf.ln2.gamma", Tensor::full({d}, 1.0));
  params_.add("tf.ln2.beta", Tensor({d}));
  params_.add("tf.w_cls", numerics::glorot(d, 1, rng));
  params_.add("tf.b_cls", Tensor({1}));
  add_embedding_params(params_, index_vocab_, config_.embed_dim, rng, "tf");
}

Var TransformerExpert::probability(Graph& g, const WindowBatch& batch,
                                   std::vector<Var>* bound, bool trainable,
                                   std::vector<Var>* attention_rows) const {
  std::vector<Var> vars;
  vars.reserve(params_.blocks.size());
  for (const auto& blk : params_.blocks)
    vars.push_back(trainable ? g.param(blk.value) : g.constant(blk.value));
  if (bound) *bound = vars;

  std::size_t at = 0;
  const Var w_in = vars[at++], b_in = vars[at++], pos = vars[at++];
  std::vector<std::array<Var, 3>> head_w;
  for (std::int64_t h = 0; h < config_.heads; ++h) {
    head_w.push_back({vars[at], vars[at + 1], vars[at + 2]});
    at += 3;
  }
  const Var w_o = vars[at++], b_o = vars[at++];
  const Var ln1_g = vars[at++], ln1_b = vars[at++];
  const Var ffn_w1 = vars[at++], ffn_b1 = vars[at++];
  const Var ffn_w2 = vars[at++], ffn_b2 = vars[at++];
  const Var ln2_g = vars[at++], ln2_b = vars[at++];
  const Var w_cls = vars[at++], b_cls = vars[at++];
  const std::size_t embed_base = at;

  const std::int64_t bsz = batch.size;
  const std::int64_t w = batch.w_eff;
  const std::int64_t d = config_.d_model;
  const std::int64_t dk = d / config_.heads;

  std::vector<Var> parts;
  parts.push_back(g.constant(batch.flat_numeric));
  for (std::size_t c = 0; c < index_vocab_.size(); ++c)
    parts.push_back(g.gather_rows(vars[embed_base + c], batch.flat_indices[c]));
  Var x = parts.size() > 1 ? g.concat(parts) : parts[0];

  Var proj = g.add_bias(g.matmul(x, w_in), b_in);          // (B*W, d)
  proj = g.add(proj, g.gather_rows(pos, batch.positions));  // + positional

  // key-side padding mask shared by every head
  Tensor key_mask({bsz, w, w});
  for (std::int64_t i = 0; i < bsz; ++i)
    for (std::int64_t q = 0; q < w; ++q)
      for (std::int64_t k = 0; k < w; ++k)
        key_mask[(i * w + q) * w + k] = batch.mask.at(i, k);

  std::vector<Var> heads;
  for (std::int64_t h = 0; h < config_.heads; ++h) {
    Var q = g.reshape(g.matmul(proj, head_w[static_cast<std::size_t>(h)][0]),
                      {bsz, w, dk});
    Var k = g.reshape(g.matmul(proj, head_w[static_cast<std::size_t>(h)][1]),
                      {bsz, w, dk});
    Var v = g.reshape(g.matmul(proj, head_w[static_cast<std::size_t>(h)][2]),
                      {bsz, w, dk});
    Var scores = g.scale(g.matmul_nt(q, k), 1.0 / std::sqrt(static_cast<double>(dk)));
    Var attn = g.softmax_masked(scores, key_mask);
    if (attention_rows) attention_rows->push_back(attn);
    heads.push_back(g.reshape(g.matmul(attn, v), {bsz * w, dk}));
  }
  Var mixed = heads.size() > 1 ? g.concat(heads) : heads[0];
  Var attended = g.add_bias(g.matmul(mixed, w_o), b_o);
  Var block1 = g.layer_norm(g.add(proj, attended), ln1_g, ln1_b);

  Var ffn = g.add_bias(
      g.matmul(g.tanh_act(g.add_bias(g.matmul(block1, ffn_w1), ffn_b1)), ffn_w2),
      ffn_b2);
  Var block2 = g.layer_norm(g.add(block1, ffn), ln2_g, ln2_b);

  // masked mean-pool over real positions
  Tensor pool_mask({bsz, w, d});
  Tensor inv_len({bsz, d});
  for (std::int64_t i = 0; i < bsz; ++i) {
    double len = 0.0;
    for (std::int64_t t = 0; t < w; ++t) len += batch.mask.at(i, t);
    for (std::int64_t t = 0; t < w; ++t)
      for (std::int64_t j = 0; j < d; ++j)
        pool_mask[(i * w + t) * d + j] = batch.mask.at(i, t);
    for (std::int64_t j = 0; j < d; ++j) inv_len.at(i, j) = 1.0 / std::max(1.0, len);
  }
  Var pooled = g.mul(g.sum_mid(g.mul(g.reshape(block2, {bsz, w, d}),
                                     g.constant(std::move(pool_mask)))),
                     g.constant(std::move(inv_len)));

  return g.sigmoid(g.add_bias(g.matmul(pooled, w_cls), b_cls));
}

Var TransformerExpert::batch_loss(Graph& g, const WindowBatch& batch, double w_pos,
                                  double w_neg, std::vector<Var>* bound) {
  Var p = probability(g, batch, bound, /*trainable=*/true);
  return g.mean_all(g.weighted_bce(p, batch.labels, w_pos, w_neg));
}

std::vector<double> TransformerExpert::score(
    const ModelData& data, std::span<const std::size_t> window_ids,
    std::int64_t batch_size) const {
  std::vector<double> out;
  out.reserve(window_ids.size());
  for (std::size_t start = 0; start < window_ids.size();
       start += static_cast<std::size_t>(batch_size)) {
    const auto count = std::min<std::size_t>(static_cast<std::size_t>(batch_size),
                                             window_ids.size() - start);
    WindowBatch batch = make_batch(data, window_ids.subspan(start, count),
                                   config_.window, kNeedFlat);
    Graph g;
    Var p = probability(g, batch, nullptr, /*trainable=*/false);
    const Tensor& v = p.value();
    for (std::int64_t i = 0; i < v.numel(); ++i) out.push_back(v[i]);
  }
  return out;
}

}  // namespace fraudlab::experts
