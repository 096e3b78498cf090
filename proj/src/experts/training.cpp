#include "fraudlab/experts/training.hpp"

#include <algorithm>
#include <cmath>

#include "fraudlab/numerics/adam.hpp"
#include "fraudlab/rng.hpp"

namespace fraudlab::experts {

using numerics::Graph;
using numerics::Var;

namespace {

void apply_index_dropout(WindowBatch& batch, double p, Rng& rng) {
  if (p <= 0.0) return;
  for (auto& col : batch.step_indices)
    for (auto& step : col)
      for (auto& idx : step)
        if (idx != 0 && rng.uniform() < p) idx = 0;
  for (auto& col : batch.flat_indices)
    for (auto& idx : col)
      if (idx != 0 && rng.uniform() < p) idx = 0;
}

std::vector<std::size_t> bucketed_order(const ModelData& data,
                                        std::span<const std::size_t> ids,
                                        std::uint64_t seed) {
  std::vector<std::size_t> order(ids.begin(), ids.end());
  Rng rng(seed);
  rng.shuffle(order);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return data.windows[a].real_length() < data.windows[b].real_length();
  });
  return order;
}

}  // namespace

double evaluate_loss(BatchModel& model, const ModelData& data,
                     std::span<const std::size_t> ids, const TrainConfig& cfg,
                     double w_pos, double w_neg) {
  if (ids.empty()) throw data_error("evaluate_loss: empty split");
  // fixed-order length bucketing keeps evaluation deterministic and cheap
  std::vector<std::size_t> order(ids.begin(), ids.end());
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return data.windows[a].real_length() < data.windows[b].real_length();
  });
  double total = 0.0;
  std::size_t done = 0;
  while (done < order.size()) {
    const auto count = std::min<std::size_t>(
        static_cast<std::size_t>(cfg.batch_size), order.size() - done);
    WindowBatch batch = make_batch(
        data, std::span<const std::size_t>(order).subspan(done, count), cfg.window,
        model.batch_needs());
    Graph g;
    Var loss = model.batch_loss(g, batch, w_pos, w_neg, nullptr);
    total += loss.value()[0] * static_cast<double>(count);
    done += count;
  }
  return total / static_cast<double>(order.size());
}

TrainResult train_model(BatchModel& model, const ModelData& data,
                        std::span<const std::size_t> train_ids,
                        std::span<const std::size_t> val_ids,
                        const TrainConfig& cfg, const LossWeights& weights) {
  const double w_pos = weights.train_pos;
  const double w_neg = weights.train_neg;
  cfg.validate();
  if (train_ids.empty()) throw data_error("train: empty training split");
  if (val_ids.empty()) throw data_error("train: empty validation split");

  numerics::Adam opt(cfg.learning_rate);
  TrainResult result;
  std::vector<double> best_params = model.params().flatten();
  double best_val = std::numeric_limits<double>::infinity();
  int epochs_without_improvement = 0;

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    const auto order =
        bucketed_order(data, train_ids, derive_seed(cfg.seed, static_cast<std::uint64_t>(epoch)));
    Rng dropout_rng(derive_seed(cfg.seed, 0xd0b0 + static_cast<std::uint64_t>(epoch)));
    double epoch_loss = 0.0;
    std::size_t done = 0;
    while (done < order.size()) {
      const auto count = std::min<std::size_t>(
          static_cast<std::size_t>(cfg.batch_size), order.size() - done);
      WindowBatch batch = make_batch(
          data, std::span<const std::size_t>(order).subspan(done, count), cfg.window,
          model.batch_needs());
      apply_index_dropout(batch, cfg.index_dropout, dropout_rng);
      Graph g;
      std::vector<Var> bound;
      Var loss = model.batch_loss(g, batch, w_pos, w_neg, &bound);
      const double loss_value = loss.value()[0];
      if (!std::isfinite(loss_value))
        throw divergence_error("training diverged: non-finite loss at epoch " +
                               std::to_string(epoch) + ", batch offset " +
                               std::to_string(done));
      epoch_loss += loss_value * static_cast<double>(count);

      auto grads = g.backward(loss);
      std::vector<numerics::Tensor> gs;
      gs.reserve(bound.size());
      for (const Var& v : bound) gs.push_back(grads.at(v));
      opt.step(model.params(), gs);
      done += count;
    }
    result.train_curve.push_back(epoch_loss / static_cast<double>(order.size()));

    const double val =
        evaluate_loss(model, data, val_ids, cfg, weights.val_pos, weights.val_neg);
    if (!std::isfinite(val))
      throw divergence_error("training diverged: non-finite validation loss at epoch " +
                             std::to_string(epoch));
    result.val_curve.push_back(val);

    if (val < best_val) {
      best_val = val;
      best_params = model.params().flatten();
      result.best_epoch = epoch;
      epochs_without_improvement = 0;
    } else {
      ++epochs_without_improvement;
    }
    result.stopped_epoch = epoch;
    if (epochs_without_improvement >= cfg.patience) break;
  }

  model.params().unflatten(best_params);
  return result;
}

numerics::DifferentiableScalarFn model_loss_fn(BatchModel& model,
                                               const ModelData& data,
                                               std::vector<std::size_t> ids,
                                               const TrainConfig& cfg,
                                               double w_pos, double w_neg) {
  numerics::DifferentiableScalarFn f;
  auto* m = &model;
  auto* d = &data;
  f.value = [m, d, ids, cfg, w_pos, w_neg](const std::vector<double>& theta) {
    m->params().unflatten(theta);
    WindowBatch batch = make_batch(*d, ids, cfg.window, m->batch_needs());
    Graph g;
    return m->batch_loss(g, batch, w_pos, w_neg, nullptr).value()[0];
  };
  f.gradient = [m, d, ids, cfg, w_pos, w_neg](const std::vector<double>& theta) {
    m->params().unflatten(theta);
    WindowBatch batch = make_batch(*d, ids, cfg.window, m->batch_needs());
    Graph g;
    std::vector<Var> bound;
    Var loss = m->batch_loss(g, batch, w_pos, w_neg, &bound);
    auto grads = g.backward(loss);
    std::vector<double> flat;
    for (const Var& v : bound) {
      const auto t = grads.at(v);
      flat.insert(flat.end(), t.vec().begin(), t.vec().end());
    }
    return flat;
  };
  return f;
}

}  // namespace fraudlab::experts
