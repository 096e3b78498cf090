#include "fraudlab/eval/cross_validate.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "fraudlab/parallel.hpp"
#include "fraudlab/preprocess/folds.hpp"
#include "fraudlab/preprocess/sequences.hpp"
#include "fraudlab/experts/threshold.hpp"
#include "fraudlab/preprocess/smote.hpp"
#include "fraudlab/rng.hpp"

namespace fraudlab::eval {

namespace {

using experts::ModelData;
using experts::TrainConfig;
using numerics::Tensor;

struct FoldPrep {
  int fold = -1;
  ModelData data;  // X includes SMOTE rows appended after the corpus rows
  std::vector<std::size_t> fit_ids, val_ids, test_ids;
  std::vector<std::size_t> fit_legit_ids, val_legit_ids;
  double w_pos = 1.0, w_neg = 1.0;
  experts::LossWeights weights;
  std::int64_t n_real = 0;
  std::vector<std::int64_t> scaler_fit_rows, smote_input_rows, class_weight_rows,
      test_rows;
  preprocess::CategoricalEncoding encoding;
  preprocess::ScalerStats scaler;
};

// stratified card-level early-stopping split: keeps fraud cards on both sides
void split_fit_val(const preprocess::RawFrame& raw,
                   const std::vector<std::int64_t>& train_rows,
                   double val_fraction, std::uint64_t seed,
                   std::vector<std::int64_t>* fit_rows,
                   std::vector<std::int64_t>* val_rows) {
  std::map<std::int64_t, bool> card_has_fraud;
  for (std::int64_t r : train_rows) {
    auto& flag = card_has_fraud[raw.cardholder_ids[static_cast<std::size_t>(r)]];
    flag = flag || raw.labels[static_cast<std::size_t>(r)] != 0;
  }
  std::vector<std::int64_t> fraud_cards, clean_cards;
  for (const auto& [card, has] : card_has_fraud)
    (has ? fraud_cards : clean_cards).push_back(card);
  Rng rng(derive_seed(seed, 0x5b17));
  rng.shuffle(fraud_cards);
  rng.shuffle(clean_cards);

  auto take = [&](const std::vector<std::int64_t>& cards) {
    std::int64_t want = static_cast<std::int64_t>(
        std::llround(val_fraction * static_cast<double>(cards.size())));
    want = std::max<std::int64_t>(cards.size() >= 2 ? 1 : 0, want);
    want = std::min<std::int64_t>(want, static_cast<std::int64_t>(cards.size()) - 1);
    return std::set<std::int64_t>(cards.begin(),
                                  cards.begin() + std::max<std::int64_t>(0, want));
  };
  std::set<std::int64_t> val_cards = take(fraud_cards);
  const auto clean_val = take(clean_cards);
  val_cards.insert(clean_val.begin(), clean_val.end());

  for (std::int64_t r : train_rows) {
    if (val_cards.count(raw.cardholder_ids[static_cast<std::size_t>(r)]))
      val_rows->push_back(r);
    else
      fit_rows->push_back(r);
  }
  if (fit_rows->empty() || val_rows->empty())
    throw data_error("fold split: not enough cards for an early-stopping split");
}

FoldPrep prepare_fold(const preprocess::RawFrame& raw, const std::vector<int>& folds,
                      int fold, const PipelineOptions& opt) {
  FoldPrep prep;
  prep.fold = fold;
  const std::int64_t n = raw.rows();

  std::vector<std::int64_t> train_rows;
  for (std::int64_t r = 0; r < n; ++r) {
    if (fold >= 0 && folds[static_cast<std::size_t>(r)] == fold)
      prep.test_rows.push_back(r);
    else
      train_rows.push_back(r);
  }

  std::vector<std::int64_t> fit_rows, val_rows;
  split_fit_val(raw, train_rows, opt.val_fraction,
                derive_seed(opt.seed, static_cast<std::uint64_t>(fold + 1)),
                &fit_rows, &val_rows);

  prep.encoding = preprocess::encode_fit(raw, fit_rows, opt.cardinality_threshold);
  preprocess::FeatureFrame frame = preprocess::encode_apply(prep.encoding, raw);
  if (opt.normalize) {
    prep.scaler = preprocess::minmax_fit(frame.X, fit_rows);
    preprocess::minmax_apply(prep.scaler, frame.X);
    prep.scaler_fit_rows = fit_rows;
  }

  auto windows = preprocess::build_sequences(frame, opt.window, opt.window_days);
  prep.n_real = n;

  // SMOTE on the fit split's minority class, interpolable columns only
  std::vector<std::int64_t> minority_rows;
  for (std::int64_t r : fit_rows)
    if (raw.labels[static_cast<std::size_t>(r)]) minority_rows.push_back(r);
  std::int64_t n_min = static_cast<std::int64_t>(minority_rows.size());
  const std::int64_t n_maj = static_cast<std::int64_t>(fit_rows.size()) - n_min;
  std::int64_t synth_count = 0;
  Tensor synth;
  std::vector<std::int64_t> synth_base;
  if (opt.smote && n_min > opt.smote_k) {
    const auto target = static_cast<std::int64_t>(
        std::llround(opt.smote_ratio * static_cast<double>(n_maj)));
    synth_count = std::max<std::int64_t>(0, target - n_min);
    if (synth_count > 0) {
      const std::int64_t d = frame.width();
      Tensor minority({n_min, d});
      for (std::int64_t i = 0; i < n_min; ++i)
        std::copy(frame.X.data() + minority_rows[static_cast<std::size_t>(i)] * d,
                  frame.X.data() + (minority_rows[static_cast<std::size_t>(i)] + 1) * d,
                  minority.data() + i * d);
      synth = preprocess::smote_oversample(
          minority, opt.smote_k, synth_count,
          derive_seed(opt.seed, 0x500 + static_cast<std::uint64_t>(fold + 1)),
          &synth_base);
      prep.smote_input_rows = minority_rows;
    }
  }

  // assemble model data: corpus rows plus synthetic rows
  const std::int64_t d = frame.width();
  prep.data.X = Tensor({n + synth_count, d});
  std::copy(frame.X.data(), frame.X.data() + n * d, prep.data.X.data());
  if (synth_count > 0)
    std::copy(synth.data(), synth.data() + synth_count * d,
              prep.data.X.data() + n * d);
  prep.data.index_vocab = frame.index_vocab;
  // synthetic rows inherit the identifier indices of their base sample
  prep.data.index_cols.resize(frame.index_cols.size());
  for (std::size_t c = 0; c < frame.index_cols.size(); ++c) {
    prep.data.index_cols[c] = frame.index_cols[c];
    prep.data.index_cols[c].resize(static_cast<std::size_t>(n + synth_count), 0);
    for (std::int64_t s = 0; s < synth_count; ++s) {
      const std::int64_t src = minority_rows[static_cast<std::size_t>(synth_base[static_cast<std::size_t>(s)])];
      prep.data.index_cols[c][static_cast<std::size_t>(n + s)] =
          frame.index_cols[c][static_cast<std::size_t>(src)];
    }
  }
  prep.data.windows = std::move(windows);
  for (std::int64_t s = 0; s < synth_count; ++s) {
    preprocess::SequenceWindow w;
    w.cardholder_id = -1;  // synthetic rows are length-1 histories
    w.rows = {n + s};
    w.label = 1;
    prep.data.windows.push_back(std::move(w));
  }

  for (std::int64_t r : fit_rows) prep.fit_ids.push_back(static_cast<std::size_t>(r));
  for (std::int64_t s = 0; s < synth_count; ++s)
    prep.fit_ids.push_back(static_cast<std::size_t>(n + s));
  for (std::int64_t r : val_rows) prep.val_ids.push_back(static_cast<std::size_t>(r));
  for (std::int64_t r : prep.test_rows)
    prep.test_ids.push_back(static_cast<std::size_t>(r));

  for (std::size_t id : prep.fit_ids)
    if (prep.data.windows[id].label == 0) prep.fit_legit_ids.push_back(id);
  for (std::size_t id : prep.val_ids)
    if (prep.data.windows[id].label == 0) prep.val_legit_ids.push_back(id);

  // class weights on the (possibly oversampled) training labels
  std::vector<int> cw_labels;
  cw_labels.reserve(prep.fit_ids.size());
  for (std::size_t id : prep.fit_ids)
    cw_labels.push_back(prep.data.windows[id].label);
  const auto [wp, wn] = preprocess::class_weights(cw_labels);
  prep.w_pos = wp;
  prep.w_neg = wn;
  prep.class_weight_rows = fit_rows;

  // validation loss is weighted for the validation split's own class mix
  prep.weights = {wp, wn, wp, wn};
  std::vector<int> val_labels;
  for (std::size_t id : prep.val_ids) val_labels.push_back(prep.data.windows[id].label);
  bool val_pos = false, val_neg = false;
  for (int y : val_labels) (y ? val_pos : val_neg) = true;
  if (val_pos && val_neg) {
    const auto [vp, vn] = preprocess::class_weights(val_labels);
    prep.weights.val_pos = vp;
    prep.weights.val_neg = vn;
  }
  return prep;
}

struct FoldModels {
  std::unique_ptr<experts::LstmExpert> lstm;
  std::unique_ptr<experts::TransformerExpert> transformer;
  std::unique_ptr<experts::AutoencoderExpert> autoencoder;
  experts::TrainResult lstm_curve, tf_curve, ae_curve;
};

TrainConfig fold_train_config(const PipelineOptions& opt, int fold, int expert) {
  TrainConfig cfg = opt.train;
  cfg.window = opt.window;
  cfg.seed = derive_seed(opt.seed, 0x1000 + static_cast<std::uint64_t>(fold + 1) * 8 +
                                       static_cast<std::uint64_t>(expert));
  return cfg;
}

FoldModels make_models(const FoldPrep& prep, const PipelineOptions& opt, int fold) {
  FoldModels m;
  const std::int64_t width = prep.data.width();
  const std::uint64_t base =
      derive_seed(opt.seed, 0x2000 + static_cast<std::uint64_t>(fold + 1));
  m.lstm = std::make_unique<experts::LstmExpert>(width, prep.data.index_vocab,
                                                 opt.lstm, derive_seed(base, 0));
  experts::TransformerConfig tf_cfg = opt.transformer;
  tf_cfg.window = opt.window;
  m.transformer = std::make_unique<experts::TransformerExpert>(
      width, prep.data.index_vocab, tf_cfg, derive_seed(base, 1));
  m.autoencoder = std::make_unique<experts::AutoencoderExpert>(
      width, opt.autoencoder, derive_seed(base, 2));
  return m;
}

std::string experts_digest(const FoldModels& m) {
  return m.lstm->params().digest() + m.transformer->params().digest() +
         m.autoencoder->params().digest();
}

// gate inputs for a set of windows: final-row features or expert outputs
Tensor gate_inputs_for(const FoldPrep& prep, const PipelineOptions& opt,
                       const std::vector<std::size_t>& ids, const Tensor& e_matrix) {
  if (opt.gate_on_expert_outputs) return e_matrix;
  const std::int64_t d = prep.data.width();
  Tensor x({static_cast<std::int64_t>(ids.size()), d});
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const std::int64_t row = prep.data.windows[ids[i]].target_row();
    std::copy(prep.data.X.data() + row * d, prep.data.X.data() + (row + 1) * d,
              x.data() + static_cast<std::int64_t>(i) * d);
  }
  return x;
}

moe::GateData build_gate_data(const FoldPrep& prep, const PipelineOptions& opt,
                              const FoldModels& models,
                              const std::vector<std::size_t>& ids) {
  const auto n = static_cast<std::int64_t>(ids.size());
  moe::GateData data;
  data.expert_outputs = Tensor({n, 3});
  const auto p_lstm = models.lstm->score(prep.data, ids, opt.train.batch_size);
  const auto p_tf = models.transformer->score(prep.data, ids, opt.train.batch_size);
  const auto err_ae = models.autoencoder->score(prep.data, ids, opt.train.batch_size);
  for (std::int64_t i = 0; i < n; ++i) {
    data.expert_outputs.at(i, moe::kLstm) = p_lstm[static_cast<std::size_t>(i)];
    data.expert_outputs.at(i, moe::kTransformer) = p_tf[static_cast<std::size_t>(i)];
    data.expert_outputs.at(i, moe::kAutoencoder) =
        models.autoencoder->pseudo_probability(err_ae[static_cast<std::size_t>(i)]);
    data.labels.push_back(prep.data.windows[ids[static_cast<std::size_t>(i)]].label);
  }
  data.inputs = gate_inputs_for(prep, opt, ids, data.expert_outputs);
  return data;
}

MetricRow classification_row(const std::vector<double>& scores,
                             const std::vector<int>& labels, double threshold) {
  MetricRow row;
  const auto m = confusion_metrics(scores, labels, threshold);
  row.accuracy = m.accuracy;
  row.precision = m.precision;
  row.recall = m.recall;
  row.f1 = m.f1;
  row.auc = roc_auc(scores, labels);
  row.ap = average_precision(scores, labels);
  return row;
}

double subset_recall(const std::vector<double>& scores, const std::vector<int>& flags,
                     double threshold) {
  std::int64_t hit = 0, total = 0;
  for (std::size_t i = 0; i < scores.size(); ++i)
    if (flags[i]) {
      ++total;
      if (scores[i] >= threshold) ++hit;
    }
  return total > 0 ? static_cast<double>(hit) / static_cast<double>(total) : 0.0;
}

void accumulate_mean_sd(const std::vector<double>& values, double* mean, double* sd) {
  double m = 0.0;
  for (double v : values) m += v;
  m /= static_cast<double>(values.size());
  double s2 = 0.0;
  for (double v : values) s2 += (v - m) * (v - m);
  *mean = m;
  *sd = values.size() > 1
            ? std::sqrt(s2 / static_cast<double>(values.size() - 1))
            : 0.0;
}

void aggregate(const std::vector<FoldReport>& folds,
               MetricRow FoldReport::* member, MetricRow* mean, MetricRow* sd) {
  auto agg = [&](double MetricRow::* field) {
    std::vector<double> vals;
    for (const auto& f : folds) vals.push_back((f.*member).*field);
    double m, s;
    accumulate_mean_sd(vals, &m, &s);
    (*mean).*field = m;
    (*sd).*field = s;
  };
  agg(&MetricRow::accuracy);
  agg(&MetricRow::precision);
  agg(&MetricRow::recall);
  agg(&MetricRow::f1);
  agg(&MetricRow::auc);
  agg(&MetricRow::ap);
  agg(&MetricRow::anomaly_rate);
  mean->classification_na = folds.empty() ? false : (folds[0].*member).classification_na;
  mean->anomaly_na = folds.empty() ? true : (folds[0].*member).anomaly_na;
  sd->classification_na = mean->classification_na;
  sd->anomaly_na = mean->anomaly_na;
}

}  // namespace

CvReport cross_validate(const std::vector<datagen::TransactionRecord>& corpus,
                        const PipelineOptions& options,
                        std::vector<FoldArtifacts>* keep_artifacts) {
  if (corpus.empty()) throw data_error("cross_validate: empty corpus");
  preprocess::RawFrame raw = preprocess::raw_frame_from_records(corpus);

  std::vector<std::int64_t> cards = raw.cardholder_ids;
  const std::vector<int> folds = preprocess::stratified_kfold(
      raw.labels, cards, options.k_folds, derive_seed(options.seed, 0xF01d));

  const int k = options.k_folds;
  std::vector<FoldPrep> preps(static_cast<std::size_t>(k));
  {
    std::vector<std::function<void()>> jobs;
    for (int f = 0; f < k; ++f)
      jobs.push_back([&, f] { preps[static_cast<std::size_t>(f)] =
                                  prepare_fold(raw, folds, f, options); });
    run_jobs(std::move(jobs), options.threads);
  }

  std::vector<FoldModels> models(static_cast<std::size_t>(k));
  for (int f = 0; f < k; ++f)
    models[static_cast<std::size_t>(f)] =
        make_models(preps[static_cast<std::size_t>(f)], options, f);

  {
    // one job per (fold, expert); every training run is internally sequential
    std::vector<std::function<void()>> jobs;
    for (int f = 0; f < k; ++f) {
      FoldPrep& prep = preps[static_cast<std::size_t>(f)];
      FoldModels& m = models[static_cast<std::size_t>(f)];
      jobs.push_back([&prep, &m, &options, f] {
        m.lstm_curve = experts::train_model(*m.lstm, prep.data, prep.fit_ids,
                                            prep.val_ids,
                                            fold_train_config(options, f, 0),
                                            prep.weights);
      });
      jobs.push_back([&prep, &m, &options, f] {
        m.tf_curve = experts::train_model(*m.transformer, prep.data, prep.fit_ids,
                                          prep.val_ids,
                                          fold_train_config(options, f, 1),
                                          prep.weights);
      });
      jobs.push_back([&prep, &m, &options, f] {
        m.ae_curve = experts::train_model(*m.autoencoder, prep.data,
                                          prep.fit_legit_ids, prep.val_legit_ids,
                                          fold_train_config(options, f, 2),
                                          experts::LossWeights::uniform());
      });
    }
    run_jobs(std::move(jobs), options.threads);
  }

  CvReport report;
  report.folds.resize(static_cast<std::size_t>(k));
  std::vector<FoldArtifacts> artifacts(static_cast<std::size_t>(k));
  std::vector<std::vector<PredictionRow>> fold_predictions(static_cast<std::size_t>(k));

  {
    std::vector<std::function<void()>> jobs;
    for (int f = 0; f < k; ++f) {
      jobs.push_back([&, f] {
        FoldPrep& prep = preps[static_cast<std::size_t>(f)];
        FoldModels& m = models[static_cast<std::size_t>(f)];
        FoldReport& fr = report.folds[static_cast<std::size_t>(f)];
        FoldArtifacts& art = artifacts[static_cast<std::size_t>(f)];
        fr.fold = f;
        fr.lstm_best_epoch = m.lstm_curve.best_epoch;
        fr.transformer_best_epoch = m.tf_curve.best_epoch;
        fr.ae_best_epoch = m.ae_curve.best_epoch;
        fr.scaler_fit_rows = prep.scaler_fit_rows;
        fr.smote_input_rows = prep.smote_input_rows;
        fr.class_weight_rows = prep.class_weight_rows;
        fr.test_rows = prep.test_rows;

        // reconstruction threshold from the validation split
        const auto val_errors =
            m.autoencoder->score(prep.data, prep.val_ids, options.train.batch_size);
        std::vector<int> val_labels;
        for (std::size_t id : prep.val_ids)
          val_labels.push_back(prep.data.windows[id].label);
        const auto cal = experts::calibrate_anomaly_threshold(val_errors, val_labels);
        m.autoencoder->set_tau(cal.tau);
        fr.tau = cal.tau;
        fr.ae_calibration_f1 = cal.best_f1;

        // frozen-expert gate training on cached expert outputs
        moe::GateData fit_data = build_gate_data(prep, options, m, prep.fit_ids);
        moe::GateData val_data = build_gate_data(prep, options, m, prep.val_ids);
        moe::GateData test_data = build_gate_data(prep, options, m, prep.test_ids);

        const std::string digest_before = experts_digest(m);
        moe::GateConfig gate_cfg{options.gate_lambda, options.gate_on_expert_outputs};
        moe::GateNetwork gate(fit_data.inputs.dim(1), 3, gate_cfg,
                              derive_seed(options.seed,
                                          0x3000 + static_cast<std::uint64_t>(f)));
        TrainConfig gate_train = fold_train_config(options, f, 3);
        const auto gate_curve =
            moe::train_gate(gate, fit_data, val_data, gate_train, prep.weights);
        fr.gate_best_epoch = gate_curve.best_epoch;
        fr.expert_digest_before_gate = digest_before;
        fr.expert_digest_after_gate = experts_digest(m);

        // held-out evaluation
        const Tensor g_test = gate.forward_all(test_data.inputs);
        const auto n_test = static_cast<std::int64_t>(prep.test_ids.size());
        std::vector<double> y(static_cast<std::size_t>(n_test));
        std::vector<double> p_lstm(static_cast<std::size_t>(n_test)),
            p_tf(static_cast<std::size_t>(n_test)), p_ae(static_cast<std::size_t>(n_test));
        std::vector<int> labels(static_cast<std::size_t>(n_test));
        std::vector<int> outlier_flag(static_cast<std::size_t>(n_test));
        std::vector<double> outlier_errors;
        const auto ae_errors =
            m.autoencoder->score(prep.data, prep.test_ids, options.train.batch_size);
        for (std::int64_t i = 0; i < n_test; ++i) {
          const std::size_t ii = static_cast<std::size_t>(i);
          const std::int64_t row = prep.test_rows[ii];
          p_lstm[ii] = test_data.expert_outputs.at(i, moe::kLstm);
          p_tf[ii] = test_data.expert_outputs.at(i, moe::kTransformer);
          p_ae[ii] = test_data.expert_outputs.at(i, moe::kAutoencoder);
          double gv[3] = {g_test.at(i, 0), g_test.at(i, 1), g_test.at(i, 2)};
          y[ii] = gv[0] * p_lstm[ii] + gv[1] * p_tf[ii] + gv[2] * p_ae[ii];
          labels[ii] = static_cast<int>(test_data.labels[ii]);
          const auto& rec = corpus[static_cast<std::size_t>(row)];
          outlier_flag[ii] = rec.fraud_type == datagen::FraudType::Other ? 1 : 0;
          if (outlier_flag[ii]) outlier_errors.push_back(ae_errors[ii]);

          PredictionRow pr;
          pr.row_id = row;
          pr.fold = f;
          pr.y = y[ii];
          pr.g[0] = gv[0];
          pr.g[1] = gv[1];
          pr.g[2] = gv[2];
          pr.e[0] = p_lstm[ii];
          pr.e[1] = p_tf[ii];
          pr.e[2] = p_ae[ii];
          pr.label = labels[ii];
          pr.fraud_type = rec.fraud_type;
          pr.tx_type = rec.transaction_type;
          fold_predictions[static_cast<std::size_t>(f)].push_back(pr);
        }

        fr.moe = classification_row(y, labels, options.decision_threshold);
        fr.moe.anomaly_na = false;
        fr.moe.anomaly_rate = subset_recall(y, outlier_flag, options.decision_threshold);
        fr.lstm = classification_row(p_lstm, labels, options.decision_threshold);
        fr.transformer = classification_row(p_tf, labels, options.decision_threshold);
        fr.autoencoder.classification_na = true;
        fr.autoencoder.anomaly_na = false;
        fr.autoencoder.anomaly_rate =
            outlier_errors.empty() ? 0.0
                                   : anomaly_detection_rate(outlier_errors, cal.tau);
        fr.f1max_threshold = best_f1_threshold(y, labels, &fr.f1_at_f1max);
        fr.gate_entropy = moe::mean_gate_entropy(gate, test_data.inputs);

        art.fold = f;
        art.fit = std::move(fit_data);
        art.val = std::move(val_data);
        art.test = std::move(test_data);
        art.test_row_ids = prep.test_rows;
        art.tau = cal.tau;
        art.w_pos = prep.w_pos;
        art.w_neg = prep.w_neg;
        art.weights = prep.weights;
        art.test_ae_errors = ae_errors;
        for (std::int64_t row : prep.test_rows) {
          art.test_fraud_types.push_back(
              corpus[static_cast<std::size_t>(row)].fraud_type);
          art.test_labels.push_back(
              corpus[static_cast<std::size_t>(row)].fraud ? 1 : 0);
        }
      });
    }
    run_jobs(std::move(jobs), options.threads);
  }

  // deterministic merge in fold order, then by corpus row
  for (int f = 0; f < k; ++f)
    report.predictions.insert(report.predictions.end(),
                              fold_predictions[static_cast<std::size_t>(f)].begin(),
                              fold_predictions[static_cast<std::size_t>(f)].end());
  std::sort(report.predictions.begin(), report.predictions.end(),
            [](const PredictionRow& a, const PredictionRow& b) {
              return a.row_id < b.row_id;
            });

  aggregate(report.folds, &FoldReport::moe, &report.moe_mean, &report.moe_sd);
  aggregate(report.folds, &FoldReport::lstm, &report.lstm_mean, &report.lstm_sd);
  aggregate(report.folds, &FoldReport::transformer, &report.transformer_mean,
            &report.transformer_sd);
  aggregate(report.folds, &FoldReport::autoencoder, &report.autoencoder_mean,
            &report.autoencoder_sd);
  {
    std::vector<double> hs;
    for (const auto& f : report.folds) hs.push_back(f.gate_entropy);
    double sd;
    accumulate_mean_sd(hs, &report.mean_gate_entropy, &sd);
  }

  // activation profile and complementarity over every held-out prediction
  {
    const auto n = static_cast<std::int64_t>(report.predictions.size());
    Tensor g_all({n, 3});
    std::vector<int> labels;
    std::vector<datagen::FraudType> types;
    for (std::int64_t i = 0; i < n; ++i) {
      const auto& p = report.predictions[static_cast<std::size_t>(i)];
      g_all.at(i, 0) = p.g[0];
      g_all.at(i, 1) = p.g[1];
      g_all.at(i, 2) = p.g[2];
      labels.push_back(p.label);
      types.push_back(p.fraud_type);
    }
    report.profile = moe::expert_activation_profile(g_all, labels, types);

    for (const auto& p : report.predictions) {
      bool all_wrong = true;
      for (double e : p.e)
        if ((e >= 0.5) == (p.label != 0)) all_wrong = false;
      const bool moe_right = (p.y >= 0.5) == (p.label != 0);
      if (all_wrong && moe_right) {
        report.complementarity.count++;
        if (report.complementarity.exemplars.size() < 20)
          report.complementarity.exemplars.push_back(p);
      }
    }
  }

  if (keep_artifacts) *keep_artifacts = std::move(artifacts);
  return report;
}

namespace {

moe::GateData drop_expert(const moe::GateData& src, int removed,
                          bool inputs_are_outputs) {
  moe::GateData out;
  const std::int64_t n = src.rows();
  const std::int64_t m = src.expert_outputs.dim(1);
  out.expert_outputs = Tensor({n, m - 1});
  for (std::int64_t i = 0; i < n; ++i) {
    std::int64_t at = 0;
    for (std::int64_t j = 0; j < m; ++j) {
      if (j == removed) continue;
      out.expert_outputs.at(i, at++) = src.expert_outputs.at(i, j);
    }
  }
  out.inputs = inputs_are_outputs ? out.expert_outputs : src.inputs;
  out.labels = src.labels;
  return out;
}

}  // namespace

std::vector<AblationRow> ablation_run(const CvReport& full,
                                      const std::vector<FoldArtifacts>& artifacts,
                                      const PipelineOptions& options) {
  // pooled full-ensemble reference over all held-out rows
  std::vector<double> full_y;
  std::vector<int> full_labels, full_outlier;
  for (const auto& p : full.predictions) {
    full_y.push_back(p.y);
    full_labels.push_back(p.label);
    full_outlier.push_back(p.fraud_type == datagen::FraudType::Other ? 1 : 0);
  }
  const MetricRow full_row =
      classification_row(full_y, full_labels, options.decision_threshold);
  const double full_outlier_recall =
      subset_recall(full_y, full_outlier, options.decision_threshold);

  std::vector<AblationRow> rows(3);
  std::vector<std::function<void()>> jobs;
  for (int removed = 0; removed < 3; ++removed) {
    jobs.push_back([&, removed] {
      std::vector<double> y_all;
      std::vector<int> labels_all, outlier_all;
      for (const auto& art : artifacts) {
        moe::GateData fit = drop_expert(art.fit, removed, options.gate_on_expert_outputs);
        moe::GateData val = drop_expert(art.val, removed, options.gate_on_expert_outputs);
        moe::GateData test = drop_expert(art.test, removed, options.gate_on_expert_outputs);
        moe::GateConfig cfg{options.gate_lambda, options.gate_on_expert_outputs};
        moe::GateNetwork gate(fit.inputs.dim(1), 2, cfg,
                              derive_seed(options.seed,
                                          0x4000 +
                                              static_cast<std::uint64_t>(art.fold) * 4 +
                                              static_cast<std::uint64_t>(removed)));
        TrainConfig tc = fold_train_config(options, art.fold, 4 + removed);
        moe::train_gate(gate, fit, val, tc, art.weights);
        const Tensor g = gate.forward_all(test.inputs);
        for (std::int64_t i = 0; i < test.rows(); ++i) {
          double y = 0.0;
          for (std::int64_t j = 0; j < 2; ++j)
            y += g.at(i, j) * test.expert_outputs.at(i, j);
          y_all.push_back(y);
          labels_all.push_back(static_cast<int>(test.labels[static_cast<std::size_t>(i)]));
          outlier_all.push_back(
              art.test_fraud_types[static_cast<std::size_t>(i)] ==
                      datagen::FraudType::Other
                  ? 1
                  : 0);
        }
      }
      AblationRow& row = rows[static_cast<std::size_t>(removed)];
      row.removed = moe::expert_name(removed);
      row.metrics = classification_row(y_all, labels_all, options.decision_threshold);
      row.outlier_recall =
          subset_recall(y_all, outlier_all, options.decision_threshold);
      row.delta_f1 = full_row.f1 - row.metrics.f1;
      row.delta_recall = full_row.recall - row.metrics.recall;
      row.delta_outlier_recall = full_outlier_recall - row.outlier_recall;
    });
  }
  run_jobs(std::move(jobs), options.threads);
  return rows;
}

EntropyStudy entropy_study(const std::vector<FoldArtifacts>& artifacts,
                           const PipelineOptions& options) {
  EntropyStudy out;
  std::vector<double> reg, unreg;
  for (const auto& art : artifacts) {
    for (int variant = 0; variant < 2; ++variant) {
      moe::GateConfig cfg{variant == 0 ? options.gate_lambda : 0.0,
                          options.gate_on_expert_outputs};
      moe::GateNetwork gate(art.fit.inputs.dim(1), 3, cfg,
                            derive_seed(options.seed,
                                        0x5000 + static_cast<std::uint64_t>(art.fold)));
      TrainConfig tc = fold_train_config(options, art.fold, 7);
      moe::train_gate(gate, art.fit, art.val, tc, art.weights);
      const double h = moe::mean_gate_entropy(gate, art.test.inputs);
      (variant == 0 ? reg : unreg).push_back(h);
    }
  }
  double sd;
  accumulate_mean_sd(reg, &out.mean_entropy_regularized, &sd);
  accumulate_mean_sd(unreg, &out.mean_entropy_unregularized, &sd);
  return out;
}

TrainedPipeline fit_full(const std::vector<datagen::TransactionRecord>& corpus,
                         const PipelineOptions& options) {
  if (corpus.empty()) throw data_error("fit_full: empty corpus");
  preprocess::RawFrame raw = preprocess::raw_frame_from_records(corpus);
  std::vector<int> no_folds(corpus.size(), -1);
  FoldPrep prep = prepare_fold(raw, no_folds, -1, options);
  FoldModels models = make_models(prep, options, -1);

  {
    std::vector<std::function<void()>> jobs;
    jobs.push_back([&] {
      models.lstm_curve =
          experts::train_model(*models.lstm, prep.data, prep.fit_ids, prep.val_ids,
                               fold_train_config(options, -1, 0), prep.weights);
    });
    jobs.push_back([&] {
      models.tf_curve = experts::train_model(
          *models.transformer, prep.data, prep.fit_ids, prep.val_ids,
          fold_train_config(options, -1, 1), prep.weights);
    });
    jobs.push_back([&] {
      models.ae_curve = experts::train_model(
          *models.autoencoder, prep.data, prep.fit_legit_ids, prep.val_legit_ids,
          fold_train_config(options, -1, 2), experts::LossWeights::uniform());
    });
    run_jobs(std::move(jobs), options.threads);
  }

  const auto val_errors =
      models.autoencoder->score(prep.data, prep.val_ids, options.train.batch_size);
  std::vector<int> val_labels;
  for (std::size_t id : prep.val_ids)
    val_labels.push_back(prep.data.windows[id].label);
  const auto cal = experts::calibrate_anomaly_threshold(val_errors, val_labels);
  models.autoencoder->set_tau(cal.tau);

  moe::GateData fit_data = build_gate_data(prep, options, models, prep.fit_ids);
  moe::GateData val_data = build_gate_data(prep, options, models, prep.val_ids);
  moe::GateConfig gate_cfg{options.gate_lambda, options.gate_on_expert_outputs};
  auto gate = std::make_unique<moe::GateNetwork>(
      fit_data.inputs.dim(1), 3, gate_cfg, derive_seed(options.seed, 0x3999));
  TrainedPipeline out;
  out.gate_curve = moe::train_gate(*gate, fit_data, val_data,
                                   fold_train_config(options, -1, 3), prep.weights);

  out.encoding = std::move(prep.encoding);
  out.scaler = std::move(prep.scaler);
  out.normalize = options.normalize;
  out.window = options.window;
  out.window_days = options.window_days;
  out.lstm = std::move(models.lstm);
  out.transformer = std::move(models.transformer);
  out.autoencoder = std::move(models.autoencoder);
  out.gate = std::move(gate);
  out.tau = cal.tau;
  out.w_pos = prep.w_pos;
  out.w_neg = prep.w_neg;
  out.lstm_curve = models.lstm_curve;
  out.transformer_curve = models.tf_curve;
  out.ae_curve = models.ae_curve;
  return out;
}

CvReport evaluate_pipeline(const TrainedPipeline& model,
                           const std::vector<datagen::TransactionRecord>& corpus,
                           const PipelineOptions& options) {
  if (corpus.empty()) throw data_error("evaluate: empty corpus");
  preprocess::RawFrame raw = preprocess::raw_frame_from_records(corpus);
  preprocess::FeatureFrame frame = preprocess::encode_apply(model.encoding, raw);
  if (model.normalize) preprocess::minmax_apply(model.scaler, frame.X);

  ModelData data;
  data.windows = preprocess::build_sequences(frame, model.window, model.window_days);
  data.X = std::move(frame.X);
  data.index_cols = std::move(frame.index_cols);
  data.index_vocab = std::move(frame.index_vocab);

  std::vector<std::size_t> ids(data.windows.size());
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = i;
  const auto p_lstm = model.lstm->score(data, ids, options.train.batch_size);
  const auto p_tf = model.transformer->score(data, ids, options.train.batch_size);
  const auto err_ae = model.autoencoder->score(data, ids, options.train.batch_size);

  const auto n = static_cast<std::int64_t>(ids.size());
  Tensor e_matrix({n, 3});
  for (std::int64_t i = 0; i < n; ++i) {
    e_matrix.at(i, moe::kLstm) = p_lstm[static_cast<std::size_t>(i)];
    e_matrix.at(i, moe::kTransformer) = p_tf[static_cast<std::size_t>(i)];
    e_matrix.at(i, moe::kAutoencoder) =
        model.autoencoder->pseudo_probability(err_ae[static_cast<std::size_t>(i)]);
  }
  Tensor gate_inputs;
  if (options.gate_on_expert_outputs) {
    gate_inputs = e_matrix;
  } else {
    const std::int64_t d = data.width();
    gate_inputs = Tensor({n, d});
    for (std::int64_t i = 0; i < n; ++i) {
      const std::int64_t row = data.windows[static_cast<std::size_t>(i)].target_row();
      std::copy(data.X.data() + row * d, data.X.data() + (row + 1) * d,
                gate_inputs.data() + i * d);
    }
  }
  const Tensor g = model.gate->forward_all(gate_inputs);

  CvReport report;
  std::vector<double> y(static_cast<std::size_t>(n));
  std::vector<int> labels(static_cast<std::size_t>(n));
  std::vector<int> outlier(static_cast<std::size_t>(n));
  std::vector<double> outlier_errors;
  for (std::int64_t i = 0; i < n; ++i) {
    const std::size_t ii = static_cast<std::size_t>(i);
    y[ii] = 0.0;
    for (int j = 0; j < 3; ++j) y[ii] += g.at(i, j) * e_matrix.at(i, j);
    labels[ii] = corpus[ii].fraud ? 1 : 0;
    outlier[ii] = corpus[ii].fraud_type == datagen::FraudType::Other ? 1 : 0;
    if (outlier[ii]) outlier_errors.push_back(err_ae[ii]);

    PredictionRow pr;
    pr.row_id = i;
    pr.fold = -1;
    pr.y = y[ii];
    for (int j = 0; j < 3; ++j) {
      pr.g[j] = g.at(i, j);
      pr.e[j] = e_matrix.at(i, j);
    }
    pr.label = labels[ii];
    pr.fraud_type = corpus[ii].fraud_type;
    pr.tx_type = corpus[ii].transaction_type;
    report.predictions.push_back(pr);
  }

  FoldReport fr;
  fr.fold = -1;
  fr.tau = model.tau;
  fr.moe = classification_row(y, labels, options.decision_threshold);
  fr.moe.anomaly_na = false;
  fr.moe.anomaly_rate = subset_recall(y, outlier, options.decision_threshold);
  fr.lstm = classification_row(p_lstm, labels, options.decision_threshold);
  fr.transformer = classification_row(p_tf, labels, options.decision_threshold);
  fr.autoencoder.classification_na = true;
  fr.autoencoder.anomaly_na = false;
  fr.autoencoder.anomaly_rate =
      outlier_errors.empty() ? 0.0
                             : anomaly_detection_rate(outlier_errors, model.tau);
  fr.f1max_threshold = best_f1_threshold(y, labels, &fr.f1_at_f1max);
  fr.gate_entropy = moe::mean_gate_entropy(*model.gate, gate_inputs);
  report.folds.push_back(fr);
  report.moe_mean = fr.moe;
  report.lstm_mean = fr.lstm;
  report.transformer_mean = fr.transformer;
  report.autoencoder_mean = fr.autoencoder;
  report.mean_gate_entropy = fr.gate_entropy;

  Tensor g_all({n, 3});
  std::vector<datagen::FraudType> types;
  for (std::int64_t i = 0; i < n; ++i) {
    for (int j = 0; j < 3; ++j) g_all.at(i, j) = report.predictions[static_cast<std::size_t>(i)].g[j];
    types.push_back(corpus[static_cast<std::size_t>(i)].fraud_type);
  }
  report.profile = moe::expert_activation_profile(g_all, labels, types);
  return report;
}

}  // namespace fraudlab::eval
