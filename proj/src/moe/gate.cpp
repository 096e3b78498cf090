#include "fraudlab/moe/gate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "fraudlab/numerics/adam.hpp"
#include "fraudlab/numerics/graph.hpp"
#include "fraudlab/rng.hpp"

namespace fraudlab::moe {

using numerics::Graph;
using numerics::Tensor;
using numerics::Var;

double combine(std::span<const double> g, std::span<const double> expert_outputs) {
  if (g.size() != expert_outputs.size())
    throw data_error("combine: weight/expert count mismatch");
  double y = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) y += g[i] * expert_outputs[i];
  return y;
}

GateNetwork::GateNetwork(std::int64_t input_width, int n_experts, GateConfig config,
                         std::uint64_t seed)
    : input_width_(input_width), n_experts_(n_experts), config_(config) {
  if (n_experts_ < 1) throw config_error("gate: need at least one expert");
  if (config_.lambda < 0.0) throw config_error("gate: lambda must be >= 0");
  Rng rng(derive_seed(seed, 0x6a7eULL));
  params_.add("gate.w", numerics::glorot(input_width_, n_experts_, rng));
  params_.add("gate.b", Tensor({n_experts_}));
}

std::vector<double> GateNetwork::forward(std::span<const double> x) const {
  if (static_cast<std::int64_t>(x.size()) != input_width_)
    throw data_error("gate: input width mismatch");
  const Tensor& w = params_.blocks[0].value;
  const Tensor& b = params_.blocks[1].value;
  Tensor logits({n_experts_});
  for (int j = 0; j < n_experts_; ++j) {
    double s = b[j];
    for (std::int64_t k = 0; k < input_width_; ++k)
      s += x[static_cast<std::size_t>(k)] * w.at(k, j);
    logits[j] = s;
  }
  return numerics::softmax_vector(logits).vec();
}

GateOutput GateNetwork::predict(std::span<const double> x,
                                std::span<const double> expert_outputs) const {
  GateOutput out;
  out.g = forward(x);
  out.expert_outputs.assign(expert_outputs.begin(), expert_outputs.end());
  out.y = combine(out.g, out.expert_outputs);
  return out;
}

Tensor GateNetwork::forward_all(const Tensor& inputs) const {
  if (inputs.dim(1) != input_width_) throw data_error("gate: input width mismatch");
  Graph g;
  Var x = g.constant(inputs);
  Var w = g.constant(params_.blocks[0].value);
  Var b = g.constant(params_.blocks[1].value);
  Var weights = g.softmax(g.add_bias(g.matmul(x, w), b));
  return weights.value();
}

namespace {

Var gate_loss(Graph& g, const GateNetwork& gate, const Tensor& inputs,
              const Tensor& expert_outputs, const Tensor& labels, double w_pos,
              double w_neg, double lambda, std::vector<Var>* bound) {
  Var x = g.constant(inputs);
  Var w = bound ? g.param(gate.params().blocks[0].value)
                : g.constant(gate.params().blocks[0].value);
  Var b = bound ? g.param(gate.params().blocks[1].value)
                : g.constant(gate.params().blocks[1].value);
  if (bound) *bound = {w, b};
  Var weights = g.softmax(g.add_bias(g.matmul(x, w), b));
  Var y = g.sum_last(g.mul(weights, g.constant(expert_outputs)));
  Var bce = g.mean_all(g.weighted_bce(y, labels, w_pos, w_neg));
  if (lambda == 0.0) return bce;
  Var entropy = g.mean_all(g.entropy_rows(weights));
  return g.add(bce, g.scale(entropy, -lambda));
}

}  // namespace

experts::TrainResult train_gate(GateNetwork& gate, const GateData& train,
                                const GateData& val,
                                const experts::TrainConfig& cfg,
                                const experts::LossWeights& weights) {
  const double w_pos = weights.train_pos;
  const double w_neg = weights.train_neg;
  cfg.validate();
  if (gate.config().lambda < 0.0) throw config_error("gate: lambda must be >= 0");
  if (train.rows() == 0 || val.rows() == 0)
    throw data_error("train_gate: empty split");

  const std::int64_t n = train.rows();
  const std::int64_t d = train.inputs.dim(1);
  const auto m = static_cast<std::int64_t>(gate.n_experts());

  numerics::Adam opt(cfg.learning_rate);
  experts::TrainResult result;
  std::vector<double> best = gate.params().flatten();
  double best_val = std::numeric_limits<double>::infinity();
  int bad_epochs = 0;

  Tensor val_labels({val.rows(), 1});
  for (std::int64_t i = 0; i < val.rows(); ++i) val_labels[i] = val.labels[static_cast<std::size_t>(i)];

  auto validation_loss = [&]() {
    Graph g;
    Var loss = gate_loss(g, gate, val.inputs, val.expert_outputs, val_labels,
                         weights.val_pos, weights.val_neg, gate.config().lambda,
                         nullptr);
    return loss.value()[0];
  };

  std::vector<std::int64_t> order(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(epoch)));
    rng.shuffle(order);
    double epoch_loss = 0.0;
    std::int64_t done = 0;
    while (done < n) {
      const std::int64_t count = std::min<std::int64_t>(cfg.batch_size, n - done);
      Tensor bx({count, d}), be({count, m}), by({count, 1});
      for (std::int64_t i = 0; i < count; ++i) {
        const std::int64_t src = order[static_cast<std::size_t>(done + i)];
        std::copy(train.inputs.data() + src * d, train.inputs.data() + (src + 1) * d,
                  bx.data() + i * d);
        std::copy(train.expert_outputs.data() + src * m,
                  train.expert_outputs.data() + (src + 1) * m, be.data() + i * m);
        by[i] = train.labels[static_cast<std::size_t>(src)];
      }
      Graph g;
      std::vector<Var> bound;
      Var loss = gate_loss(g, gate, bx, be, by, w_pos, w_neg,
                           gate.config().lambda, &bound);
      const double lv = loss.value()[0];
      if (!std::isfinite(lv))
        throw divergence_error("gate training diverged at epoch " +
                               std::to_string(epoch));
      epoch_loss += lv * static_cast<double>(count);
      auto grads = g.backward(loss);
      std::vector<Tensor> gs{grads.at(bound[0]), grads.at(bound[1])};
      opt.step(gate.params(), gs);
      done += count;
    }
    result.train_curve.push_back(epoch_loss / static_cast<double>(n));
    const double vl = validation_loss();
    if (!std::isfinite(vl))
      throw divergence_error("gate validation loss non-finite at epoch " +
                             std::to_string(epoch));
    result.val_curve.push_back(vl);
    if (vl < best_val) {
      best_val = vl;
      best = gate.params().flatten();
      result.best_epoch = epoch;
      bad_epochs = 0;
    } else {
      ++bad_epochs;
    }
    result.stopped_epoch = epoch;
    if (bad_epochs >= cfg.patience) break;
  }
  gate.params().unflatten(best);
  return result;
}

double mean_gate_entropy(const GateNetwork& gate, const Tensor& inputs) {
  const Tensor weights = gate.forward_all(inputs);
  const std::int64_t n = weights.dim(0), m = weights.dim(1);
  double total = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    double h = 0.0;
    for (std::int64_t j = 0; j < m; ++j) {
      const double v = weights.at(i, j);
      if (v > 0.0) h -= v * std::log(v);
    }
    total += h;
  }
  return total / static_cast<double>(std::max<std::int64_t>(1, n));
}

namespace {

ActivationProfile::Row mean_row(const std::string& key, const Tensor& w,
                                const std::vector<std::int64_t>& rows) {
  ActivationProfile::Row r;
  r.key = key;
  r.n = static_cast<std::int64_t>(rows.size());
  r.mean_g.assign(static_cast<std::size_t>(w.dim(1)), 0.0);
  for (std::int64_t i : rows)
    for (std::int64_t j = 0; j < w.dim(1); ++j)
      r.mean_g[static_cast<std::size_t>(j)] += w.at(i, j);
  if (!rows.empty())
    for (double& v : r.mean_g) v /= static_cast<double>(rows.size());
  return r;
}

}  // namespace

ActivationProfile expert_activation_profile(
    const Tensor& gate_weights, const std::vector<int>& labels,
    const std::vector<datagen::FraudType>& fraud_types) {
  if (static_cast<std::size_t>(gate_weights.dim(0)) != labels.size() ||
      labels.size() != fraud_types.size())
    throw data_error("activation profile: length mismatch");

  ActivationProfile p;
  using datagen::FraudType;
  for (FraudType t : {FraudType::StolenCard, FraudType::IdentityFraud,
                      FraudType::OnlinePaymentFraud, FraudType::Other}) {
    std::vector<std::int64_t> rows;
    for (std::size_t i = 0; i < fraud_types.size(); ++i)
      if (fraud_types[i] == t) rows.push_back(static_cast<std::int64_t>(i));
    if (rows.empty()) continue;  // absent bucket is recorded as absent
    p.by_fraud_type.push_back(mean_row(datagen::to_string(t), gate_weights, rows));
  }
  std::vector<std::int64_t> legit, fraud, all;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    all.push_back(static_cast<std::int64_t>(i));
    (labels[i] ? fraud : legit).push_back(static_cast<std::int64_t>(i));
  }
  if (!legit.empty()) p.by_class.push_back(mean_row("legit", gate_weights, legit));
  if (!fraud.empty()) p.by_class.push_back(mean_row("fraud", gate_weights, fraud));
  p.by_class.push_back(mean_row("all", gate_weights, all));
  return p;
}

std::string ActivationProfile::to_csv() const {
  std::string out = "fraud_type,w_rnn,w_transformer,w_autoencoder,n\n";
  char buf[160];
  auto emit = [&](const Row& r) {
    const double g0 = r.mean_g.size() > 0 ? r.mean_g[0] : 0.0;
    const double g1 = r.mean_g.size() > 1 ? r.mean_g[1] : 0.0;
    const double g2 = r.mean_g.size() > 2 ? r.mean_g[2] : 0.0;
    std::snprintf(buf, sizeof(buf), "%s,%.6f,%.6f,%.6f,%lld\n", r.key.c_str(), g0,
                  g1, g2, static_cast<long long>(r.n));
    out += buf;
  };
  for (const auto& r : by_fraud_type) emit(r);
  for (const auto& r : by_class) emit(r);
  return out;
}

}  // namespace fraudlab::moe
