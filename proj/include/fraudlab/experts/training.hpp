#pragma once

#include <span>
#include <vector>

#include "fraudlab/experts/expert.hpp"
#include "fraudlab/numerics/finite_diff.hpp"

namespace fraudlab::experts {

struct TrainConfig {
  double learning_rate = 1e-3;
  std::int64_t batch_size = 128;
  int max_epochs = 50;
  int patience = 5;
  std::uint64_t seed = 1;
  std::int64_t window = 10;  // W used for positional features
  // training-time probability of replacing an identifier index with the
  // reserved unknown slot; unseen cards/ips dominate held-out folds, so the
  // embeddings must not become label memory
  double index_dropout = 0.25;

  void validate() const {
    if (learning_rate <= 0.0) throw config_error("train: learning rate must be > 0");
    if (patience < 1) throw config_error("train: patience must be >= 1");
    if (batch_size < 1) throw config_error("train: batch size must be >= 1");
    if (max_epochs < 1) throw config_error("train: max_epochs must be >= 1");
    if (index_dropout < 0.0 || index_dropout >= 1.0)
      throw config_error("train: index_dropout must lie in [0, 1)");
  }
};

struct TrainResult {
  std::vector<double> train_curve;  // mean batch loss per epoch
  std::vector<double> val_curve;    // validation loss per epoch
  int best_epoch = 0;               // 1-based epoch whose params were kept
  int stopped_epoch = 0;            // epoch at which training ended
};

// Class weights for the training objective and for the early-stopping
// validation loss. The validation side is weighted for its own (unbalanced)
// class mix so an improvement means better cost-sensitive performance, even
// when the training split was oversampled to balance.
struct LossWeights {
  double train_pos = 1.0;
  double train_neg = 1.0;
  double val_pos = 1.0;
  double val_neg = 1.0;

  static LossWeights uniform() { return {}; }
};

// Mini-batch training with adaptive moment estimation and early stopping on
// validation loss. Parameters from the best validation epoch are restored
// into the model. Batches are shuffled per epoch, then bucketed by real
// sequence length so padded steps stay cheap; both passes are deterministic
// given the config seed. Non-finite losses abort with a diagnostic.
TrainResult train_model(BatchModel& model, const ModelData& data,
                        std::span<const std::size_t> train_ids,
                        std::span<const std::size_t> val_ids,
                        const TrainConfig& cfg, const LossWeights& weights);

// Validation-style loss of the current parameters over a window set.
double evaluate_loss(BatchModel& model, const ModelData& data,
                     std::span<const std::size_t> ids, const TrainConfig& cfg,
                     double w_pos, double w_neg);

// Wraps a model's batch loss on a fixed window set as a differentiable
// function of the flattened parameters (for gradient checking).
numerics::DifferentiableScalarFn model_loss_fn(BatchModel& model,
                                               const ModelData& data,
                                               std::vector<std::size_t> ids,
                                               const TrainConfig& cfg,
                                               double w_pos, double w_neg);

}  // namespace fraudlab::experts
