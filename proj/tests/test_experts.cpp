#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "fraudlab/experts/autoencoder.hpp"
#include "fraudlab/experts/lstm.hpp"
#include "fraudlab/experts/threshold.hpp"
#include "fraudlab/experts/training.hpp"
#include "fraudlab/experts/transformer.hpp"
#include "fraudlab/rng.hpp"

using namespace fraudlab;
using namespace fraudlab::experts;
using numerics::Graph;
using numerics::Tensor;
using numerics::Var;

namespace {

// random singleton/short windows over a random matrix
ModelData toy_data(std::int64_t rows, std::int64_t width, std::int64_t max_len,
                   std::uint64_t seed, bool with_index = false) {
  Rng rng(seed);
  ModelData d;
  d.X = Tensor({rows, width});
  for (std::int64_t i = 0; i < rows * width; ++i) d.X[i] = rng.uniform(0.0, 1.0);
  if (with_index) {
    std::vector<std::int64_t> col(static_cast<std::size_t>(rows));
    for (auto& v : col) v = static_cast<std::int64_t>(rng.below(5));
    d.index_cols.push_back(col);
    d.index_vocab.push_back(5);
  }
  std::int64_t at = 0;
  std::int64_t card = 0;
  while (at < rows) {
    const std::int64_t len =
        std::min<std::int64_t>(rows - at, 1 + static_cast<std::int64_t>(rng.below(
                                                  static_cast<std::uint64_t>(max_len))));
    for (std::int64_t t = 0; t < len; ++t) {
      preprocess::SequenceWindow w;
      w.cardholder_id = card;
      for (std::int64_t k = std::max<std::int64_t>(at, at + t - max_len + 1);
           k <= at + t; ++k)
        w.rows.push_back(k);
      w.label = static_cast<int>(rng.below(2));
      d.windows.push_back(std::move(w));
    }
    at += len;
    ++card;
  }
  return d;
}

std::vector<std::size_t> all_ids(const ModelData& d) {
  std::vector<std::size_t> ids(d.windows.size());
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = i;
  return ids;
}

}  // namespace

TEST_CASE("lstm: zero parameters give 0.5, full padding gives sigmoid(bias)") {
  ModelData d = toy_data(6, 3, 3, 11);
  LstmExpert lstm(3, {}, {.hidden = 4, .embed_dim = 2}, 5);
  for (auto& blk : lstm.params().blocks)
    std::fill(blk.value.vec().begin(), blk.value.vec().end(), 0.0);
  auto ids = all_ids(d);
  auto p = lstm.score(d, ids, 4);
  for (double v : p) CHECK(v == doctest::Approx(0.5).epsilon(1e-15));

  // fully padded batch: output comes from the zero initial state
  lstm.params().find("lstm.b_out")->vec()[0] = 0.7;
  WindowBatch batch = make_batch(d, std::vector<std::size_t>{0}, 0);
  batch.mask = Tensor({1, batch.w_eff});  // zero mask
  Graph g;
  Var prob = lstm.probability(g, batch, nullptr, false);
  CHECK(prob.value()[0] ==
        doctest::Approx(1.0 / (1.0 + std::exp(-0.7))).epsilon(1e-12));
}

TEST_CASE("lstm: manual two-step recurrence oracle") {
  // H=2, F=2, hand-set parameters; expected value computed step by step
  LstmExpert lstm(2, {}, {.hidden = 2, .embed_dim = 1}, 3);
  const std::int64_t h = 2, f = 2;
  auto set = [&](const char* name, std::vector<double> v) {
    Tensor* t = lstm.params().find(name);
    REQUIRE(t != nullptr);
    REQUIRE(t->vec().size() == v.size());
    t->vec() = v;
  };
  // wx: (2 x 8) [i|f|o|g], wh: (2 x 8), b: (8)
  std::vector<double> wx(16), wh(16), b(8);
  Rng rng(77);
  for (auto& v : wx) v = rng.uniform(-0.5, 0.5);
  for (auto& v : wh) v = rng.uniform(-0.5, 0.5);
  for (auto& v : b) v = rng.uniform(-0.2, 0.2);
  set("lstm.wx", wx);
  set("lstm.wh", wh);
  set("lstm.b", b);
  set("lstm.w_out", {0.8, -1.1});
  set("lstm.b_out", {0.05});

  ModelData d;
  d.X = Tensor({2, 2}, {0.3, -0.4, 0.9, 0.2});
  preprocess::SequenceWindow w;
  w.cardholder_id = 1;
  w.rows = {0, 1};
  w.label = 1;
  d.windows.push_back(w);
  auto p = lstm.score(d, std::vector<std::size_t>{0}, 1);

  // independent recurrence
  auto sig = [](double x) { return 1.0 / (1.0 + std::exp(-x)); };
  double hh[2] = {0, 0}, cc[2] = {0, 0};
  for (int t = 0; t < 2; ++t) {
    const double* x = d.X.data() + t * f;
    double z[8];
    for (int j = 0; j < 8; ++j) {
      z[j] = b[static_cast<std::size_t>(j)];
      for (int k = 0; k < f; ++k) z[j] += x[k] * wx[static_cast<std::size_t>(k * 8 + j)];
      for (int k = 0; k < h; ++k) z[j] += hh[k] * wh[static_cast<std::size_t>(k * 8 + j)];
    }
    for (int j = 0; j < h; ++j) {
      const double gi = sig(z[j]), gf = sig(z[2 + j]), go = sig(z[4 + j]);
      const double gc = std::tanh(z[6 + j]);
      cc[j] = gf * cc[j] + gi * gc;
      hh[j] = go * std::tanh(cc[j]);
    }
  }
  const double logit = 0.05 + 0.8 * hh[0] - 1.1 * hh[1];
  CHECK(p[0] == doctest::Approx(sig(logit)).epsilon(1e-12));
}

TEST_CASE("lstm: output invariant to the amount of leading padding") {
  ModelData d = toy_data(40, 4, 6, 21, true);
  LstmExpert lstm(4, {5}, {.hidden = 3, .embed_dim = 2}, 9);
  auto ids = all_ids(d);
  // score each window alone (w_eff = its own length)
  std::vector<double> alone;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    auto p = lstm.score(d, std::vector<std::size_t>{i}, 1);
    alone.push_back(p[0]);
  }
  // batched with mixed lengths (w_eff = max in batch -> extra padding)
  auto batched = lstm.score(d, ids, 40);
  for (std::size_t i = 0; i < ids.size(); ++i)
    CHECK(batched[i] == doctest::Approx(alone[i]).epsilon(1e-12));
}

TEST_CASE("transformer: single position attends to itself with weight 1") {
  TransformerExpert tf(3, {}, {.d_model = 4, .heads = 2, .ffn = 8, .embed_dim = 2,
                               .window = 5},
                       7);
  ModelData d = toy_data(1, 3, 1, 31);
  WindowBatch batch = make_batch(d, std::vector<std::size_t>{0}, 5);
  Graph g;
  std::vector<Var> attn;
  Var p = tf.probability(g, batch, nullptr, false, &attn);
  REQUIRE(attn.size() == 2);
  for (const Var& a : attn) {
    CHECK(a.value().numel() == 1);
    CHECK(a.value()[0] == 1.0);
  }
  CHECK(p.value()[0] > 0.0);
  CHECK(p.value()[0] < 1.0);
}

TEST_CASE("transformer: identical positions yield identical attention rows") {
  TransformerExpert tf(3, {}, {.d_model = 4, .heads = 1, .ffn = 8, .embed_dim = 2,
                               .window = 4},
                       13);
  // zero the positional table so permutation symmetry holds exactly
  Tensor* pos = tf.params().find("tf.pos");
  std::fill(pos->vec().begin(), pos->vec().end(), 0.0);

  ModelData d;
  d.X = Tensor({2, 3}, {0.4, 0.1, 0.7, 0.4, 0.1, 0.7});  // two identical rows
  preprocess::SequenceWindow w;
  w.cardholder_id = 1;
  w.rows = {0, 1};
  w.label = 0;
  d.windows.push_back(w);
  WindowBatch batch = make_batch(d, std::vector<std::size_t>{0}, 4);
  Graph g;
  std::vector<Var> attn;
  tf.probability(g, batch, nullptr, false, &attn);
  const Tensor& a = attn[0].value();  // (1, 2, 2)
  CHECK(a[0] == doctest::Approx(a[2]).epsilon(1e-12));
  CHECK(a[1] == doctest::Approx(a[3]).epsilon(1e-12));
  CHECK(a[0] + a[1] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("transformer: manual single-head attention oracle on W=3, d=4") {
  TransformerConfig cfg{.d_model = 4, .heads = 1, .ffn = 4, .embed_dim = 1,
                        .window = 3};
  TransformerExpert tf(4, {}, cfg, 17);

  ModelData d;
  d.X = Tensor({3, 4});
  Rng rng(5);
  for (std::int64_t i = 0; i < 12; ++i) d.X[i] = rng.uniform(-1.0, 1.0);
  preprocess::SequenceWindow w;
  w.cardholder_id = 1;
  w.rows = {0, 1, 2};
  w.label = 0;
  d.windows.push_back(w);
  WindowBatch batch = make_batch(d, std::vector<std::size_t>{0}, 3);

  Graph g;
  std::vector<Var> attn;
  tf.probability(g, batch, nullptr, false, &attn);
  const Tensor& a = attn[0].value();  // (1, 3, 3)

  // independent computation of the attention matrix
  const Tensor& w_in = *tf.params().find("tf.w_in");
  const Tensor& b_in = *tf.params().find("tf.b_in");
  const Tensor& pos = *tf.params().find("tf.pos");
  const Tensor& wq = *tf.params().find("tf.h0.wq");
  const Tensor& wk = *tf.params().find("tf.h0.wk");
  double proj[3][4];
  for (int t = 0; t < 3; ++t)
    for (int j = 0; j < 4; ++j) {
      proj[t][j] = b_in[j] + pos.at(t, j);
      for (int k = 0; k < 4; ++k) proj[t][j] += d.X.at(t, k) * w_in.at(k, j);
    }
  double q[3][4], kk[3][4];
  for (int t = 0; t < 3; ++t)
    for (int j = 0; j < 4; ++j) {
      q[t][j] = 0.0;
      kk[t][j] = 0.0;
      for (int c = 0; c < 4; ++c) {
        q[t][j] += proj[t][c] * wq.at(c, j);
        kk[t][j] += proj[t][c] * wk.at(c, j);
      }
    }
  for (int qi = 0; qi < 3; ++qi) {
    double scores[3];
    double mx = -1e300;
    for (int ki = 0; ki < 3; ++ki) {
      scores[ki] = 0.0;
      for (int c = 0; c < 4; ++c) scores[ki] += q[qi][c] * kk[ki][c];
      scores[ki] /= 2.0;  // sqrt(d_k) = 2
      mx = std::max(mx, scores[ki]);
    }
    double denom = 0.0;
    for (int ki = 0; ki < 3; ++ki) denom += std::exp(scores[ki] - mx);
    for (int ki = 0; ki < 3; ++ki)
      CHECK(a[qi * 3 + ki] ==
            doctest::Approx(std::exp(scores[ki] - mx) / denom).epsilon(1e-12));
  }
}

TEST_CASE("transformer: attention rows are simplex points, padded keys get 0") {
  TransformerExpert tf(4, {}, {.d_model = 8, .heads = 2, .ffn = 8, .embed_dim = 2,
                               .window = 6},
                       3);
  ModelData d = toy_data(30, 4, 6, 8);
  auto ids = all_ids(d);
  WindowBatch batch = make_batch(d, ids, 6);
  Graph g;
  std::vector<Var> attn;
  tf.probability(g, batch, nullptr, false, &attn);
  for (const Var& av : attn) {
    const Tensor& a = av.value();
    const std::int64_t b = a.dim(0), w = a.dim(1);
    for (std::int64_t i = 0; i < b; ++i)
      for (std::int64_t qi = 0; qi < w; ++qi) {
        double sum = 0.0;
        for (std::int64_t ki = 0; ki < w; ++ki) {
          const double v = a[(i * w + qi) * w + ki];
          CHECK(v >= 0.0);
          if (batch.mask.at(i, ki) == 0.0) CHECK(v == 0.0);
          sum += v;
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
      }
  }
  CHECK_THROWS_AS((TransformerExpert{4, {}, {.d_model = 6, .heads = 4, .ffn = 8,
                                             .embed_dim = 2, .window = 4}, 3}),
                  Error);
}

TEST_CASE("autoencoder: invariant enforcement and zero fixed point") {
  CHECK_THROWS_AS((AutoencoderExpert{4, {.hidden = 4, .bottleneck = 4}, 1}), Error);
  CHECK_THROWS_AS((AutoencoderExpert{4, {.hidden = 4, .bottleneck = 6}, 1}), Error);

  AutoencoderExpert ae(5, {.hidden = 3, .bottleneck = 2}, 1);
  for (auto& blk : ae.params().blocks)
    std::fill(blk.value.vec().begin(), blk.value.vec().end(), 0.0);
  Tensor rows({2, 5});
  auto errs = ae.errors_for_rows(rows);
  CHECK(errs[0] == 0.0);
  CHECK(errs[1] == 0.0);

  // nonzero input with zero weights reconstructs to zero: error = mean x^2
  Tensor one({1, 5}, {1.0, 2.0, 0.0, 0.0, 0.0});
  auto e2 = ae.errors_for_rows(one);
  CHECK(e2[0] == doctest::Approx(5.0 / 5.0));
  CHECK(e2[0] >= 0.0);
}

TEST_CASE("autoencoder pseudo-probability mapping") {
  AutoencoderExpert ae(5, {.hidden = 3, .bottleneck = 2}, 1);
  ae.set_tau(0.2);
  CHECK(ae.pseudo_probability(0.0) == 0.0);
  CHECK(ae.pseudo_probability(0.1) == doctest::Approx(0.25));
  CHECK(ae.pseudo_probability(0.2) == doctest::Approx(0.5));
  CHECK(ae.pseudo_probability(0.3) == doctest::Approx(1.0));
  CHECK(ae.pseudo_probability(5.0) == doctest::Approx(1.0));
}

namespace {

// validation loss rises while training loss falls: train targets 0, val
// targets 1, loss = mean (w - y)^2
class DriftModel : public BatchModel {
 public:
  DriftModel() { params_.add("w", Tensor({1, 1}, {0.5})); }
  numerics::ParamSet& params() override { return params_; }
  const numerics::ParamSet& params() const override { return params_; }
  Var batch_loss(Graph& g, const WindowBatch& batch, double, double,
                 std::vector<Var>* bound) override {
    Var w = g.param(params_.blocks[0].value);
    if (bound) *bound = {w};
    Var ones = g.constant(Tensor::full({batch.size, 1}, 1.0));
    Var pred = g.matmul(ones, w);
    Var diff = g.add(pred, g.scale(g.constant(batch.labels), -1.0));
    return g.mean_all(g.mul(diff, diff));
  }
  std::vector<double> score(const ModelData&, std::span<const std::size_t> ids,
                            std::int64_t) const override {
    return std::vector<double>(ids.size(), params_.blocks[0].value[0]);
  }

 private:
  numerics::ParamSet params_;
};

ModelData labeled_singletons(std::int64_t n, int label) {
  ModelData d;
  d.X = Tensor({n, 1});
  for (std::int64_t i = 0; i < n; ++i) {
    preprocess::SequenceWindow w;
    w.cardholder_id = i;
    w.rows = {i};
    w.label = label;
    d.windows.push_back(w);
  }
  return d;
}

}  // namespace

TEST_CASE("train_model: early stopping keeps the best-epoch parameters") {
  // train split drives w toward 0; validation wants w = 1 and only degrades
  ModelData train = labeled_singletons(8, 0);
  ModelData merged = train;
  for (int i = 0; i < 4; ++i) {
    preprocess::SequenceWindow w;
    w.cardholder_id = 100 + i;
    w.rows = {static_cast<std::int64_t>(i % 8)};
    w.label = 1;
    merged.windows.push_back(w);
  }
  std::vector<std::size_t> train_ids{0, 1, 2, 3, 4, 5, 6, 7};
  std::vector<std::size_t> val_ids{8, 9, 10, 11};

  TrainConfig cfg;
  cfg.learning_rate = 0.05;
  cfg.batch_size = 8;
  cfg.max_epochs = 30;
  cfg.patience = 1;
  cfg.seed = 7;
  cfg.window = 1;

  DriftModel m;
  auto result = train_model(m, merged, train_ids, val_ids, cfg, LossWeights::uniform());
  CHECK(result.stopped_epoch == 2);
  CHECK(result.best_epoch == 1);
  CHECK(result.val_curve[1] > result.val_curve[0]);

  // the kept parameter equals the epoch-1 value
  DriftModel fresh;
  TrainConfig one = cfg;
  one.max_epochs = 1;
  train_model(fresh, merged, train_ids, val_ids, one, LossWeights::uniform());
  CHECK(m.params().blocks[0].value[0] ==
        doctest::Approx(fresh.params().blocks[0].value[0]).epsilon(1e-15));
}

TEST_CASE("train_model: separable toy problem learns and is deterministic") {
  // windows with feature near 1 are positive, near 0 negative
  Rng rng(3);
  ModelData d;
  d.X = Tensor({80, 2});
  for (std::int64_t i = 0; i < 80; ++i) {
    const int label = i % 2;
    d.X.at(i, 0) = (label ? 0.9 : 0.1) + rng.uniform(-0.05, 0.05);
    d.X.at(i, 1) = rng.uniform(0.0, 1.0);
    preprocess::SequenceWindow w;
    w.cardholder_id = i;
    w.rows = {i};
    w.label = label;
    d.windows.push_back(std::move(w));
  }
  std::vector<std::size_t> train_ids, val_ids;
  for (std::size_t i = 0; i < 64; ++i) train_ids.push_back(i);
  for (std::size_t i = 64; i < 80; ++i) val_ids.push_back(i);

  TrainConfig cfg;
  cfg.learning_rate = 0.02;
  cfg.batch_size = 64;
  cfg.max_epochs = 10;
  cfg.patience = 10;
  cfg.seed = 5;
  cfg.window = 1;

  LstmExpert lstm(2, {}, {.hidden = 3, .embed_dim = 1}, 5);
  auto result = train_model(lstm, d, train_ids, val_ids, cfg, LossWeights::uniform());
  REQUIRE(result.train_curve.size() >= 5);
  for (int e = 1; e < 5; ++e)
    CHECK(result.train_curve[static_cast<std::size_t>(e)] <
          result.train_curve[static_cast<std::size_t>(e - 1)]);

  LstmExpert again(2, {}, {.hidden = 3, .embed_dim = 1}, 5);
  train_model(again, d, train_ids, val_ids, cfg, LossWeights::uniform());
  CHECK(lstm.params().flatten() == again.params().flatten());
}

TEST_CASE("gradient checks: every expert matches finite differences on toy shapes") {
  TrainConfig cfg;
  cfg.window = 3;
  for (std::uint64_t trial = 0; trial < 3; ++trial) {
    ModelData d = toy_data(10, 4, 3, 100 + trial, true);
    std::vector<std::size_t> ids{0, 1, 2, 3, 4};

    LstmExpert lstm(4, {5}, {.hidden = 3, .embed_dim = 2}, trial);
    REQUIRE(lstm.params().total_size() <= 200);
    auto f1 = model_loss_fn(lstm, d, ids, cfg, 1.3, 0.8);
    CHECK(numerics::finite_difference_check(f1, lstm.params().flatten(), 1e-5) < 1e-4);

    TransformerExpert tf(4, {5}, {.d_model = 4, .heads = 2, .ffn = 4,
                                  .embed_dim = 2, .window = 3},
                         trial);
    auto f2 = model_loss_fn(tf, d, ids, cfg, 1.3, 0.8);
    CHECK(numerics::finite_difference_check(f2, tf.params().flatten(), 1e-5) < 1e-4);

    AutoencoderExpert ae(4, {.hidden = 3, .bottleneck = 2}, trial);
    auto f3 = model_loss_fn(ae, d, ids, cfg, 1.0, 1.0);
    CHECK(numerics::finite_difference_check(f3, ae.params().flatten(), 1e-5) < 1e-4);
  }
}

TEST_CASE("full lstm loss on a 2-step 3-feature batch passes the fd oracle") {
  ModelData d;
  d.X = Tensor({4, 3});
  Rng rng(9);
  for (std::int64_t i = 0; i < 12; ++i) d.X[i] = rng.uniform(0.0, 1.0);
  for (int c = 0; c < 2; ++c) {
    preprocess::SequenceWindow w;
    w.cardholder_id = c;
    w.rows = {c * 2, c * 2 + 1};
    w.label = c;
    d.windows.push_back(w);
  }
  TrainConfig cfg;
  cfg.window = 2;
  LstmExpert lstm(3, {}, {.hidden = 3, .embed_dim = 1}, 2);
  auto f = model_loss_fn(lstm, d, {0, 1}, cfg, 1.0, 1.0);
  CHECK(numerics::finite_difference_check(f, lstm.params().flatten(), 1e-5) < 1e-4);
}

TEST_CASE("calibrate_anomaly_threshold: midpoint, degenerate, sweep oracle") {
  {
    auto cal = calibrate_anomaly_threshold({0.1, 0.9}, {0, 1});
    CHECK(cal.tau == doctest::Approx(0.5));
    CHECK(cal.best_f1 == doctest::Approx(1.0));
    CHECK_FALSE(cal.degenerate);
  }
  {
    auto cal = calibrate_anomaly_threshold({0.3, 0.3, 0.3}, {0, 1, 1});
    CHECK(cal.tau == doctest::Approx(0.3));
    CHECK(cal.degenerate);
  }
  CHECK_THROWS_AS(calibrate_anomaly_threshold({0.1, 0.2}, {1, 1}), Error);
  {
    // 200-point mixed validation: exhaustive sweep oracle agrees
    Rng rng(41);
    std::vector<double> errors;
    std::vector<int> labels;
    for (int i = 0; i < 200; ++i) {
      const int y = rng.uniform() < 0.3 ? 1 : 0;
      labels.push_back(y);
      errors.push_back(y ? rng.uniform(0.2, 1.0) : rng.uniform(0.0, 0.6));
    }
    auto cal = calibrate_anomaly_threshold(errors, labels);

    // oracle: test every observed error as a cut with rule (error > tau)
    double best_f1 = -1.0, best_tau = 0.0;
    std::vector<double> sorted = errors;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    for (double t : sorted) {
      std::int64_t tp = 0, fp = 0, fn = 0;
      for (std::size_t i = 0; i < errors.size(); ++i) {
        const bool flag = errors[i] > t;
        if (flag && labels[i]) ++tp;
        if (flag && !labels[i]) ++fp;
        if (!flag && labels[i]) ++fn;
      }
      const double f1 = 2.0 * tp / std::max<double>(1.0, 2.0 * tp + fp + fn);
      if (f1 > best_f1) {
        best_f1 = f1;
        best_tau = t;
      }
    }
    CHECK(cal.best_f1 == doctest::Approx(best_f1));
    // calibrated tau must induce the same flags as the oracle's best cut
    for (double e : errors) CHECK((e > cal.tau) == (e > best_tau));
  }
}

TEST_CASE("autoencoder trained on inliers flags planted outliers") {
  Rng rng(55);
  const std::int64_t n = 300, dwidth = 6;
  ModelData d;
  d.X = Tensor({n, dwidth});
  for (std::int64_t i = 0; i < n; ++i)
    for (std::int64_t j = 0; j < dwidth; ++j)
      d.X.at(i, j) = 0.3 + 0.1 * rng.normal() + (j % 2 ? 0.2 : 0.0);
  for (std::int64_t i = 0; i < n; ++i) {
    preprocess::SequenceWindow w;
    w.cardholder_id = i;
    w.rows = {i};
    w.label = 0;
    d.windows.push_back(std::move(w));
  }
  std::vector<std::size_t> train_ids, val_ids;
  for (std::size_t i = 0; i < 250; ++i) train_ids.push_back(i);
  for (std::size_t i = 250; i < 300; ++i) val_ids.push_back(i);

  TrainConfig cfg;
  cfg.learning_rate = 5e-3;
  cfg.batch_size = 50;
  cfg.max_epochs = 40;
  cfg.patience = 5;
  cfg.seed = 8;
  cfg.window = 1;
  AutoencoderExpert ae(dwidth, {.hidden = 4, .bottleneck = 2}, 12);
  train_model(ae, d, train_ids, val_ids, cfg, LossWeights::uniform());

  auto inlier_errs = ae.score(d, val_ids, 64);
  std::sort(inlier_errs.begin(), inlier_errs.end());
  const double p90 = inlier_errs[static_cast<std::size_t>(0.9 * 50)];

  Tensor outliers({3, dwidth});
  for (std::int64_t i = 0; i < 3; ++i)
    for (std::int64_t j = 0; j < dwidth; ++j)
      outliers.at(i, j) = 3.0 + static_cast<double>(i);  // far outside training range
  auto out_errs = ae.errors_for_rows(outliers);
  for (double e : out_errs) CHECK(e > p90);
}
