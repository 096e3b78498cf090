#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "fraudlab/numerics/graph.hpp"
#include "fraudlab/numerics/params.hpp"
#include "fraudlab/preprocess/sequences.hpp"

namespace fraudlab::experts {

// Everything an expert needs to see a dataset split: the scaled numeric /
// one-hot matrix, the integer index columns feeding embeddings, and the
// per-transaction windows referencing rows of X.
struct ModelData {
  numerics::Tensor X;  // rows x width, scaled
  std::vector<std::vector<std::int64_t>> index_cols;
  std::vector<std::int64_t> index_vocab;
  std::vector<preprocess::SequenceWindow> windows;

  std::int64_t width() const { return X.dim(1); }
};

// One assembled mini-batch. Sequences are right-aligned to w_eff, the
// longest real length in the batch, so no step is fully padded.
struct WindowBatch {
  std::int64_t size = 0;
  std::int64_t w_eff = 0;
  std::int64_t window = 0;  // configured W; positions index into [0, window)
  std::vector<numerics::Tensor> step_numeric;  // per step: (B, width)
  std::vector<std::vector<std::vector<std::int64_t>>> step_indices;  // [col][t][b]
  numerics::Tensor flat_numeric;  // (B * w_eff, width)
  std::vector<std::vector<std::int64_t>> flat_indices;  // [col][b * w_eff]
  std::vector<std::int64_t> positions;  // b * w_eff absolute window positions
  numerics::Tensor mask;        // (B, w_eff) 1 = real step
  numerics::Tensor final_rows;  // (B, width) target-transaction features
  numerics::Tensor labels;      // (B, 1)
};

// which parts of a batch a model consumes
enum BatchNeeds : unsigned {
  kNeedSteps = 1u,      // per-step matrices + per-step indices (LSTM)
  kNeedFlat = 2u,       // flattened sequence + positions (Transformer)
  kNeedFinalRows = 4u,  // final-transaction rows (Autoencoder)
  kNeedAll = 7u,
};

WindowBatch make_batch(const ModelData& data,
                       std::span<const std::size_t> window_ids,
                       std::int64_t window, unsigned needs = kNeedAll);

// Common surface consumed by the trainer: bind parameters into a graph,
// produce a scalar batch loss, and score windows in inference mode.
class BatchModel {
 public:
  virtual ~BatchModel() = default;
  virtual numerics::ParamSet& params() = 0;
  virtual const numerics::ParamSet& params() const = 0;

  // Scalar training objective over the batch. `bound` receives the graph
  // handles of the parameter blocks, in block order.
  virtual numerics::Var batch_loss(numerics::Graph& g, const WindowBatch& batch,
                                   double w_pos, double w_neg,
                                   std::vector<numerics::Var>* bound) = 0;

  // Model output per window (probability for classifiers, reconstruction
  // error for the autoencoder). Pure function of (params, data).
  virtual std::vector<double> score(const ModelData& data,
                                    std::span<const std::size_t> window_ids,
                                    std::int64_t batch_size) const = 0;

  virtual unsigned batch_needs() const { return kNeedAll; }
};

// Glorot-uniform embedding tables for every index column.
void add_embedding_params(numerics::ParamSet& params,
                          const std::vector<std::int64_t>& vocab,
                          std::int64_t embed_dim, fraudlab::Rng& rng,
                          const std::string& prefix);

// (B, H) constant built by broadcasting a (B,) column `w` times.
numerics::Tensor expand_mask(const numerics::Tensor& mask, std::int64_t step,
                             std::int64_t width, bool invert);

}  // namespace fraudlab::experts
