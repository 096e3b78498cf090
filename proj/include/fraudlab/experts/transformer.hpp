#pragma once

#include "fraudlab/experts/expert.hpp"

namespace fraudlab::experts {

struct TransformerConfig {
  std::int64_t d_model = 32;
  std::int64_t heads = 4;
  std::int64_t ffn = 64;
  std::int64_t embed_dim = 4;
  std::int64_t window = 10;  // positional table size
};

// One encoder block: multi-head scaled dot-product self-attention with a
// key-side padding mask, residual + layer norm, position-wise feed-forward,
// residual + layer norm, then a masked mean-pool and sigmoid readout.
// Learned positional embeddings cover `window` positions.
class TransformerExpert : public BatchModel {
 public:
  TransformerExpert(std::int64_t numeric_width,
                    std::vector<std::int64_t> index_vocab,
                    TransformerConfig config, std::uint64_t seed);

  numerics::ParamSet& params() override { return params_; }
  const numerics::ParamSet& params() const override { return params_; }

  numerics::Var batch_loss(numerics::Graph& g, const WindowBatch& batch,
                           double w_pos, double w_neg,
                           std::vector<numerics::Var>* bound) override;

  std::vector<double> score(const ModelData& data,
                            std::span<const std::size_t> window_ids,
                            std::int64_t batch_size) const override;

  numerics::Var probability(numerics::Graph& g, const WindowBatch& batch,
                            std::vector<numerics::Var>* bound, bool trainable,
                            std::vector<numerics::Var>* attention_rows = nullptr) const;

  unsigned batch_needs() const override { return kNeedFlat; }
  const TransformerConfig& config() const { return config_; }

 private:
  TransformerConfig config_;
  std::int64_t numeric_width_;
  std::vector<std::int64_t> index_vocab_;
  numerics::ParamSet params_;
};

}  // namespace fraudlab::experts
