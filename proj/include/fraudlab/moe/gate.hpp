#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "fraudlab/datagen/schema.hpp"
#include "fraudlab/experts/training.hpp"
#include "fraudlab/numerics/params.hpp"

namespace fraudlab::moe {

// Expert order used everywhere: 0 = LSTM (RNN), 1 = Transformer,
// 2 = Autoencoder.
constexpr int kLstm = 0;
constexpr int kTransformer = 1;
constexpr int kAutoencoder = 2;
inline const char* expert_name(int i) {
  switch (i) {
    case kLstm: return "rnn";
    case kTransformer: return "transformer";
    case kAutoencoder: return "autoencoder";
  }
  return "?";
}

struct GateConfig {
  double lambda = 0.01;  // entropy regularization coefficient
  bool on_expert_outputs = false;  // gate input: feature row (default) or E(x)
};

struct GateOutput {
  std::vector<double> g;               // simplex weights, one per expert
  std::vector<double> expert_outputs;  // E_i(x) in [0,1]
  double y = 0.0;                      // combined fraud probability
};

// y = sum_i g_i * E_i; exact convex combination.
double combine(std::span<const double> g, std::span<const double> expert_outputs);

// Cached per-row tensors the gate trains and predicts on: expert outputs are
// constants under the frozen-expert protocol.
struct GateData {
  numerics::Tensor inputs;          // n x d
  numerics::Tensor expert_outputs;  // n x M
  std::vector<double> labels;

  std::int64_t rows() const { return inputs.dim(0); }
};

// Single affine layer + softmax over M experts.
class GateNetwork {
 public:
  GateNetwork(std::int64_t input_width, int n_experts, GateConfig config,
              std::uint64_t seed);

  std::vector<double> forward(std::span<const double> x) const;
  GateOutput predict(std::span<const double> x,
                     std::span<const double> expert_outputs) const;

  // weights for every row of a matrix, n x M
  numerics::Tensor forward_all(const numerics::Tensor& inputs) const;

  numerics::ParamSet& params() { return params_; }
  const numerics::ParamSet& params() const { return params_; }
  const GateConfig& config() const { return config_; }
  std::int64_t input_width() const { return input_width_; }
  int n_experts() const { return n_experts_; }

 private:
  std::int64_t input_width_;
  int n_experts_;
  GateConfig config_;
  numerics::ParamSet params_;
};

// Minimizes weighted BCE(y_MoE, label) - lambda * H(g) with early stopping.
// Expert outputs enter as constants, so expert parameters cannot change.
experts::TrainResult train_gate(GateNetwork& gate, const GateData& train,
                                const GateData& val,
                                const experts::TrainConfig& cfg,
                                const experts::LossWeights& weights);

double mean_gate_entropy(const GateNetwork& gate, const numerics::Tensor& inputs);

// Mean gate weights per fraud typology (and per class), with sample counts.
struct ActivationProfile {
  struct Row {
    std::string key;  // fraud type name or "legit"/"fraud"/"all"
    std::vector<double> mean_g;
    std::int64_t n = 0;
  };
  std::vector<Row> by_fraud_type;
  std::vector<Row> by_class;

  std::string to_csv() const;  // fraud_type,w_rnn,w_transformer,w_autoencoder,n
};

ActivationProfile expert_activation_profile(
    const numerics::Tensor& gate_weights,  // n x M
    const std::vector<int>& labels,
    const std::vector<datagen::FraudType>& fraud_types);

}  // namespace fraudlab::moe
