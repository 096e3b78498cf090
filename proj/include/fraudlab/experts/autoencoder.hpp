#pragma once

#include "fraudlab/experts/expert.hpp"

namespace fraudlab::experts {

struct AutoencoderConfig {
  std::int64_t hidden = 16;
  std::int64_t bottleneck = 8;
};

// Bottleneck autoencoder over the final-transaction feature row. Trains on
// legitimate rows only; the per-row mean squared reconstruction error is the
// anomaly signal, thresholded at a calibrated tau.
class AutoencoderExpert : public BatchModel {
 public:
  AutoencoderExpert(std::int64_t width, AutoencoderConfig config, std::uint64_t seed);

  numerics::ParamSet& params() override { return params_; }
  const numerics::ParamSet& params() const override { return params_; }

  // mean reconstruction error over the batch's final rows (labels unused)
  numerics::Var batch_loss(numerics::Graph& g, const WindowBatch& batch,
                           double w_pos, double w_neg,
                           std::vector<numerics::Var>* bound) override;

  // per-window reconstruction errors
  std::vector<double> score(const ModelData& data,
                            std::span<const std::size_t> window_ids,
                            std::int64_t batch_size) const override;

  // reconstruction + per-row error for a row matrix
  numerics::Var row_errors(numerics::Graph& g, numerics::Var rows,
                           const std::vector<numerics::Var>& bound) const;
  std::vector<numerics::Var> bind(numerics::Graph& g, bool trainable) const;

  std::vector<double> errors_for_rows(const numerics::Tensor& rows) const;

  double tau() const { return tau_; }
  void set_tau(double tau) { tau_ = tau; }

  // maps an error to the [0,1] pseudo-probability the gate consumes
  double pseudo_probability(double error) const;

  unsigned batch_needs() const override { return kNeedFinalRows; }
  const AutoencoderConfig& config() const { return config_; }

 private:
  AutoencoderConfig config_;
  std::int64_t width_;
  numerics::ParamSet params_;
  double tau_ = 0.0;
};

}  // namespace fraudlab::experts
