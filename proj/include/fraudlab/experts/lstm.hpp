#pragma once

#include "fraudlab/experts/expert.hpp"

namespace fraudlab::experts {

struct LstmConfig {
  std::int64_t hidden = 32;
  std::int64_t embed_dim = 4;
};

// Single-layer LSTM classifier over transaction windows. Gate and recurrent
// matrices are fused ([input|forget|output|cell] layout); the forget-gate
// bias starts at 1. Padded steps are skipped via mask-select, so the output
// is invariant to the amount of leading padding.
class LstmExpert : public BatchModel {
 public:
  LstmExpert(std::int64_t numeric_width, std::vector<std::int64_t> index_vocab,
             LstmConfig config, std::uint64_t seed);

  numerics::ParamSet& params() override { return params_; }
  const numerics::ParamSet& params() const override { return params_; }

  numerics::Var batch_loss(numerics::Graph& g, const WindowBatch& batch,
                           double w_pos, double w_neg,
                           std::vector<numerics::Var>* bound) override;

  std::vector<double> score(const ModelData& data,
                            std::span<const std::size_t> window_ids,
                            std::int64_t batch_size) const override;

  // (B,1) fraud probabilities for one batch; exposed for tests.
  numerics::Var probability(numerics::Graph& g, const WindowBatch& batch,
                            std::vector<numerics::Var>* bound,
                            bool trainable) const;

  unsigned batch_needs() const override { return kNeedSteps; }
  const LstmConfig& config() const { return config_; }

 private:
  LstmConfig config_;
  std::int64_t numeric_width_;
  std::vector<std::int64_t> index_vocab_;
  numerics::ParamSet params_;
};

}  // namespace fraudlab::experts
