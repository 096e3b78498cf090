#include "fraudlab/eval/reports.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>

#include <json.hpp>

#include "fraudlab/datagen/dataset_io.hpp"

namespace fraudlab::eval {

namespace {

using nlohmann::ordered_json;

std::string f6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

std::string pct(double v, bool na) {
  if (na) return "N/A";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v * 100.0);
  return buf;
}

std::string num4(double v, bool na) {
  if (na) return "N/A";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

std::string pct_pm(double mean, double sd, bool na) {
  if (na) return "N/A";
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.2f±%.2f", mean * 100.0, sd * 100.0);
  return buf;
}

void render_table(std::string& out, const std::vector<std::string>& header,
                  const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) width[c] = header[c].size();
  for (const auto& r : rows)
    for (std::size_t c = 0; c < r.size(); ++c)
      width[c] = std::max(width[c], r[c].size());
  auto emit_row = [&](const std::vector<std::string>& r) {
    for (std::size_t c = 0; c < r.size(); ++c) {
      out += r[c];
      if (c + 1 < r.size()) out.append(width[c] - r[c].size() + 2, ' ');
    }
    out += '\n';
  };
  emit_row(header);
  std::size_t total = 0;
  for (std::size_t c = 0; c < header.size(); ++c) total += width[c] + 2;
  out.append(total > 2 ? total - 2 : total, '-');
  out += '\n';
  for (const auto& r : rows) emit_row(r);
}

ordered_json metric_row_json(const MetricRow& m) {
  ordered_json j;
  j["accuracy"] = m.accuracy;
  j["precision"] = m.precision;
  j["recall"] = m.recall;
  j["f1"] = m.f1;
  j["auc_roc"] = m.auc;
  j["average_precision"] = m.ap;
  j["anomaly_rate"] = m.anomaly_rate;
  j["classification_na"] = m.classification_na;
  j["anomaly_na"] = m.anomaly_na;
  return j;
}

MetricRow metric_row_from_json(const ordered_json& j) {
  MetricRow m;
  m.accuracy = j.at("accuracy");
  m.precision = j.at("precision");
  m.recall = j.at("recall");
  m.f1 = j.at("f1");
  m.auc = j.at("auc_roc");
  m.ap = j.at("average_precision");
  m.anomaly_rate = j.at("anomaly_rate");
  m.classification_na = j.at("classification_na");
  m.anomaly_na = j.at("anomaly_na");
  return m;
}

ordered_json prediction_json(const PredictionRow& p) {
  ordered_json j;
  j["row_id"] = p.row_id;
  j["fold"] = p.fold;
  j["y"] = p.y;
  j["g"] = {p.g[0], p.g[1], p.g[2]};
  j["e"] = {p.e[0], p.e[1], p.e[2]};
  j["label"] = p.label;
  j["fraud_type"] = datagen::to_string(p.fraud_type);
  return j;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i)
    if (i == line.size() || line[i] == ',') {
      out.push_back(line.substr(start, i - start));
      start = i + 1;
    }
  return out;
}

}  // namespace

std::string predictions_to_csv(const std::vector<PredictionRow>& rows) {
  std::string out =
      "row_id,fold,y,g_rnn,g_transformer,g_autoencoder,e_rnn,e_transformer,"
      "e_autoencoder,label,fraud_type,transaction_type\n";
  for (const auto& p : rows) {
    out += std::to_string(p.row_id);
    out += ',';
    out += std::to_string(p.fold);
    out += ',';
    out += f6(p.y);
    for (double v : p.g) {
      out += ',';
      out += f6(v);
    }
    for (double v : p.e) {
      out += ',';
      out += f6(v);
    }
    out += ',';
    out += p.label ? "fraud" : "legit";
    out += ',';
    out += datagen::to_string(p.fraud_type);
    out += ',';
    out += datagen::to_string(p.tx_type);
    out += '\n';
  }
  return out;
}

std::vector<PredictionRow> predictions_from_csv_text(const std::string& text) {
  std::vector<PredictionRow> out;
  std::size_t pos = 0;
  bool first = true;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    const std::string line = text.substr(pos, end - pos);
    pos = end + 1;
    if (line.empty()) continue;
    if (first) {
      first = false;
      if (line.rfind("row_id,", 0) != 0)
        throw data_error("prediction log: unexpected header");
      continue;
    }
    const auto cells = split_csv_line(line);
    if (cells.size() != 12) throw data_error("prediction log: bad row");
    PredictionRow p;
    p.row_id = std::stoll(cells[0]);
    p.fold = std::stoi(cells[1]);
    p.y = std::stod(cells[2]);
    for (int j = 0; j < 3; ++j) p.g[j] = std::stod(cells[static_cast<std::size_t>(3 + j)]);
    for (int j = 0; j < 3; ++j) p.e[j] = std::stod(cells[static_cast<std::size_t>(6 + j)]);
    p.label = cells[9] == "fraud" ? 1 : 0;
    p.fraud_type = datagen::fraud_type_from(cells[10]);
    p.tx_type = datagen::transaction_type_from(cells[11]);
    out.push_back(p);
  }
  return out;
}

std::string run_report_to_json(const RunReport& report) {
  ordered_json j;
  j["decision_threshold"] = report.decision_threshold;

  ordered_json folds = ordered_json::array();
  for (const auto& f : report.cv.folds) {
    ordered_json jf;
    jf["fold"] = f.fold;
    jf["moe"] = metric_row_json(f.moe);
    jf["lstm"] = metric_row_json(f.lstm);
    jf["transformer"] = metric_row_json(f.transformer);
    jf["autoencoder"] = metric_row_json(f.autoencoder);
    jf["tau"] = f.tau;
    jf["ae_calibration_f1"] = f.ae_calibration_f1;
    jf["f1max_threshold"] = f.f1max_threshold;
    jf["f1_at_f1max"] = f.f1_at_f1max;
    jf["gate_entropy"] = f.gate_entropy;
    jf["best_epochs"] = {{"lstm", f.lstm_best_epoch},
                         {"transformer", f.transformer_best_epoch},
                         {"autoencoder", f.ae_best_epoch},
                         {"gate", f.gate_best_epoch}};
    jf["expert_digest_before_gate"] = f.expert_digest_before_gate;
    jf["expert_digest_after_gate"] = f.expert_digest_after_gate;
    jf["test_row_count"] = f.test_rows.size();
    folds.push_back(jf);
  }
  j["folds"] = folds;
  j["aggregate"] = {{"moe_mean", metric_row_json(report.cv.moe_mean)},
                    {"moe_sd", metric_row_json(report.cv.moe_sd)},
                    {"lstm_mean", metric_row_json(report.cv.lstm_mean)},
                    {"lstm_sd", metric_row_json(report.cv.lstm_sd)},
                    {"transformer_mean", metric_row_json(report.cv.transformer_mean)},
                    {"transformer_sd", metric_row_json(report.cv.transformer_sd)},
                    {"autoencoder_mean", metric_row_json(report.cv.autoencoder_mean)},
                    {"autoencoder_sd", metric_row_json(report.cv.autoencoder_sd)},
                    {"mean_gate_entropy", report.cv.mean_gate_entropy}};

  ordered_json profile = ordered_json::array();
  for (const auto& r : report.cv.profile.by_fraud_type)
    profile.push_back({{"key", r.key}, {"mean_g", r.mean_g}, {"n", r.n}});
  for (const auto& r : report.cv.profile.by_class)
    profile.push_back({{"key", r.key}, {"mean_g", r.mean_g}, {"n", r.n}});
  j["activation_profile"] = profile;

  ordered_json ablation = ordered_json::array();
  for (const auto& a : report.ablation) {
    ordered_json ja;
    ja["removed"] = a.removed;
    ja["metrics"] = metric_row_json(a.metrics);
    ja["delta_f1"] = a.delta_f1;
    ja["delta_recall"] = a.delta_recall;
    ja["outlier_recall"] = a.outlier_recall;
    ja["delta_outlier_recall"] = a.delta_outlier_recall;
    ablation.push_back(ja);
  }
  j["ablation"] = ablation;

  j["entropy_study"] = {
      {"mean_entropy_regularized", report.entropy.mean_entropy_regularized},
      {"mean_entropy_unregularized", report.entropy.mean_entropy_unregularized}};

  auto variants_json = [](const std::vector<VariantResult>& vs) {
    ordered_json arr = ordered_json::array();
    for (const auto& v : vs)
      arr.push_back({{"name", v.name},
                     {"moe", metric_row_json(v.moe_mean)},
                     {"lstm", metric_row_json(v.lstm_mean)},
                     {"transformer", metric_row_json(v.transformer_mean)}});
    return arr;
  };
  j["preprocessing_variants"] = variants_json(report.preprocessing_variants);
  j["window_variants"] = variants_json(report.window_variants);

  ordered_json comp;
  comp["count"] = report.cv.complementarity.count;
  ordered_json ex = ordered_json::array();
  for (const auto& p : report.cv.complementarity.exemplars)
    ex.push_back(prediction_json(p));
  comp["exemplars"] = ex;
  j["complementarity"] = comp;

  return j.dump(2) + "\n";
}

RunReport run_report_from_json(const std::string& text) {
  const auto j = ordered_json::parse(text);
  RunReport r;
  r.decision_threshold = j.at("decision_threshold");
  for (const auto& jf : j.at("folds")) {
    FoldReport f;
    f.fold = jf.at("fold");
    f.moe = metric_row_from_json(jf.at("moe"));
    f.lstm = metric_row_from_json(jf.at("lstm"));
    f.transformer = metric_row_from_json(jf.at("transformer"));
    f.autoencoder = metric_row_from_json(jf.at("autoencoder"));
    f.tau = jf.at("tau");
    f.ae_calibration_f1 = jf.at("ae_calibration_f1");
    f.f1max_threshold = jf.at("f1max_threshold");
    f.f1_at_f1max = jf.at("f1_at_f1max");
    f.gate_entropy = jf.at("gate_entropy");
    f.expert_digest_before_gate = jf.at("expert_digest_before_gate");
    f.expert_digest_after_gate = jf.at("expert_digest_after_gate");
    r.cv.folds.push_back(f);
  }
  const auto& agg = j.at("aggregate");
  r.cv.moe_mean = metric_row_from_json(agg.at("moe_mean"));
  r.cv.moe_sd = metric_row_from_json(agg.at("moe_sd"));
  r.cv.lstm_mean = metric_row_from_json(agg.at("lstm_mean"));
  r.cv.lstm_sd = metric_row_from_json(agg.at("lstm_sd"));
  r.cv.transformer_mean = metric_row_from_json(agg.at("transformer_mean"));
  r.cv.transformer_sd = metric_row_from_json(agg.at("transformer_sd"));
  r.cv.autoencoder_mean = metric_row_from_json(agg.at("autoencoder_mean"));
  r.cv.autoencoder_sd = metric_row_from_json(agg.at("autoencoder_sd"));
  r.cv.mean_gate_entropy = agg.at("mean_gate_entropy");

  for (const auto& jp : j.at("activation_profile")) {
    moe::ActivationProfile::Row row;
    row.key = jp.at("key");
    row.mean_g = jp.at("mean_g").get<std::vector<double>>();
    row.n = jp.at("n");
    const std::string& key = row.key;
    if (key == "legit" || key == "fraud" || key == "all")
      r.cv.profile.by_class.push_back(row);
    else
      r.cv.profile.by_fraud_type.push_back(row);
  }

  for (const auto& ja : j.at("ablation")) {
    AblationRow a;
    a.removed = ja.at("removed");
    a.metrics = metric_row_from_json(ja.at("metrics"));
    a.delta_f1 = ja.at("delta_f1");
    a.delta_recall = ja.at("delta_recall");
    a.outlier_recall = ja.at("outlier_recall");
    a.delta_outlier_recall = ja.at("delta_outlier_recall");
    r.ablation.push_back(a);
  }
  r.entropy.mean_entropy_regularized =
      j.at("entropy_study").at("mean_entropy_regularized");
  r.entropy.mean_entropy_unregularized =
      j.at("entropy_study").at("mean_entropy_unregularized");

  auto variants_from = [](const ordered_json& arr) {
    std::vector<VariantResult> out;
    for (const auto& jv : arr) {
      VariantResult v;
      v.name = jv.at("name");
      v.moe_mean = metric_row_from_json(jv.at("moe"));
      v.lstm_mean = metric_row_from_json(jv.at("lstm"));
      v.transformer_mean = metric_row_from_json(jv.at("transformer"));
      out.push_back(v);
    }
    return out;
  };
  r.preprocessing_variants = variants_from(j.at("preprocessing_variants"));
  r.window_variants = variants_from(j.at("window_variants"));
  r.cv.complementarity.count = j.at("complementarity").at("count");
  return r;
}

std::string render_model_comparison(const CvReport& cv) {
  std::string out = "Model performance comparison (5-fold mean±sd, % where noted)\n\n";
  std::vector<std::string> header = {"Model",    "Accuracy(%)", "Precision(%)",
                                     "Recall(%)", "F1(%)",       "AUC-ROC",
                                     "PR-AUC",   "AnomalyRate(%)"};
  auto row = [&](const std::string& name, const MetricRow& m, const MetricRow& s) {
    std::vector<std::string> r;
    r.push_back(name);
    if (m.classification_na) {
      r.insert(r.end(), {"N/A", "N/A", "N/A", "N/A", "N/A", "N/A"});
    } else {
      r.push_back(pct_pm(m.accuracy, s.accuracy, false));
      r.push_back(pct_pm(m.precision, s.precision, false));
      r.push_back(pct_pm(m.recall, s.recall, false));
      r.push_back(pct_pm(m.f1, s.f1, false));
      r.push_back(num4(m.auc, false));
      r.push_back(num4(m.ap, false));
    }
    r.push_back(m.anomaly_na ? "N/A" : pct_pm(m.anomaly_rate, s.anomaly_rate, false));
    return r;
  };
  std::vector<std::vector<std::string>> rows;
  rows.push_back(row("MoE ensemble", cv.moe_mean, cv.moe_sd));
  rows.push_back(row("Transformer", cv.transformer_mean, cv.transformer_sd));
  rows.push_back(row("RNN (LSTM)", cv.lstm_mean, cv.lstm_sd));
  rows.push_back(row("Autoencoder", cv.autoencoder_mean, cv.autoencoder_sd));
  render_table(out, header, rows);
  return out;
}

std::string render_preprocessing_table(const std::vector<VariantResult>& variants) {
  std::string out = "Preprocessing impact on the MoE ensemble\n\n";
  std::vector<std::string> header = {"Pipeline", "Accuracy(%)", "Precision(%)",
                                     "Recall(%)", "F1(%)", "AUC-ROC"};
  std::vector<std::vector<std::string>> rows;
  for (const auto& v : variants)
    rows.push_back({v.name, pct(v.moe_mean.accuracy, false),
                    pct(v.moe_mean.precision, false), pct(v.moe_mean.recall, false),
                    pct(v.moe_mean.f1, false), num4(v.moe_mean.auc, false)});
  render_table(out, header, rows);
  return out;
}

std::string render_transaction_type_table(const std::vector<PredictionRow>& rows,
                                          double threshold) {
  std::string out = "MoE performance by transaction type\n\n";
  std::map<datagen::TransactionType, std::pair<std::vector<double>, std::vector<int>>>
      groups;
  for (const auto& p : rows) {
    groups[p.tx_type].first.push_back(p.y);
    groups[p.tx_type].second.push_back(p.label);
  }
  std::vector<std::string> header = {"TransactionType", "Accuracy(%)",
                                     "Precision(%)",    "Recall(%)",
                                     "F1(%)",           "n"};
  std::vector<std::vector<std::string>> body;
  for (const auto& [type, data] : groups) {
    const auto m = confusion_metrics(data.first, data.second, threshold);
    body.push_back({datagen::to_string(type), pct(m.accuracy, false),
                    pct(m.precision, false), pct(m.recall, false), pct(m.f1, false),
                    std::to_string(data.first.size())});
  }
  render_table(out, header, body);
  return out;
}

std::string render_time_window_table(const std::vector<VariantResult>& variants) {
  std::string out = "Impact of the time-window lookback on the MoE ensemble\n\n";
  std::vector<std::string> header = {"Window(days)", "Accuracy(%)", "Precision(%)",
                                     "Recall(%)", "F1(%)", "AUC-ROC"};
  std::vector<std::vector<std::string>> rows;
  for (const auto& v : variants)
    rows.push_back({v.name, pct(v.moe_mean.accuracy, false),
                    pct(v.moe_mean.precision, false), pct(v.moe_mean.recall, false),
                    pct(v.moe_mean.f1, false), num4(v.moe_mean.auc, false)});
  render_table(out, header, rows);
  return out;
}

std::string render_expert_weights(const moe::ActivationProfile& profile) {
  std::string out = "Average gate weight per expert\n\n";
  std::vector<std::string> header = {"Population", "RNN(%)", "Transformer(%)",
                                     "Autoencoder(%)", "n"};
  std::vector<std::vector<std::string>> rows;
  auto add = [&](const moe::ActivationProfile::Row& r) {
    rows.push_back({r.key, pct(r.mean_g.size() > 0 ? r.mean_g[0] : 0, false),
                    pct(r.mean_g.size() > 1 ? r.mean_g[1] : 0, false),
                    pct(r.mean_g.size() > 2 ? r.mean_g[2] : 0, false),
                    std::to_string(r.n)});
  };
  for (const auto& r : profile.by_class) add(r);
  for (const auto& r : profile.by_fraud_type) add(r);
  render_table(out, header, rows);
  return out;
}

std::string render_ablation(const std::vector<AblationRow>& rows) {
  std::string out = "Ablation: gate retrained over two frozen experts\n\n";
  std::vector<std::string> header = {"Removed",      "F1(%)",
                                     "ΔF1(pp)",      "Recall(%)",
                                     "ΔRecall(pp)",  "OutlierRecall(%)",
                                     "ΔOutlier(pp)"};
  std::vector<std::vector<std::string>> body;
  char buf[32];
  auto pp = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%+.2f", v * 100.0);
    return std::string(buf);
  };
  for (const auto& a : rows)
    body.push_back({a.removed, pct(a.metrics.f1, false), pp(a.delta_f1),
                    pct(a.metrics.recall, false), pp(a.delta_recall),
                    pct(a.outlier_recall, false), pp(a.delta_outlier_recall)});
  render_table(out, header, body);
  return out;
}

std::string render_complementarity(const ComplementaritySummary& summary) {
  std::string out = "Rows every standalone expert misclassified but the MoE got right: " +
                    std::to_string(summary.count) + "\n\n";
  if (summary.exemplars.empty()) return out;
  std::vector<std::string> header = {"row_id", "y",     "g_rnn", "g_tf",
                                     "g_ae",   "e_rnn", "e_tf",  "e_ae",
                                     "label",  "fraud_type"};
  std::vector<std::vector<std::string>> rows;
  for (const auto& p : summary.exemplars)
    rows.push_back({std::to_string(p.row_id), f6(p.y), f6(p.g[0]), f6(p.g[1]),
                    f6(p.g[2]), f6(p.e[0]), f6(p.e[1]), f6(p.e[2]),
                    p.label ? "fraud" : "legit", datagen::to_string(p.fraud_type)});
  render_table(out, header, rows);
  return out;
}

CvReport cv_report_from_predictions(const std::vector<PredictionRow>& rows,
                                    double threshold) {
  CvReport report;
  report.predictions = rows;
  std::set<int> fold_ids;
  for (const auto& p : rows) fold_ids.insert(p.fold);

  for (int f : fold_ids) {
    std::vector<double> y, p0, p1;
    std::vector<int> labels, outlier;
    std::vector<double> ae_pseudo;
    for (const auto& p : rows) {
      if (p.fold != f) continue;
      y.push_back(p.y);
      p0.push_back(p.e[0]);
      p1.push_back(p.e[1]);
      ae_pseudo.push_back(p.e[2]);
      labels.push_back(p.label);
      outlier.push_back(p.fraud_type == datagen::FraudType::Other ? 1 : 0);
    }
    FoldReport fr;
    fr.fold = f;
    auto fill = [&](const std::vector<double>& scores) {
      MetricRow m;
      const auto c = confusion_metrics(scores, labels, threshold);
      m.accuracy = c.accuracy;
      m.precision = c.precision;
      m.recall = c.recall;
      m.f1 = c.f1;
      m.auc = roc_auc(scores, labels);
      m.ap = average_precision(scores, labels);
      return m;
    };
    fr.moe = fill(y);
    fr.moe.anomaly_na = false;
    fr.lstm = fill(p0);
    fr.transformer = fill(p1);
    fr.autoencoder.classification_na = true;
    fr.autoencoder.anomaly_na = false;
    // pseudo-probability > 0.5 coincides with reconstruction error > tau
    std::int64_t outlier_hits = 0, outlier_total = 0, moe_hits = 0;
    for (std::size_t i = 0; i < y.size(); ++i)
      if (outlier[i]) {
        ++outlier_total;
        if (ae_pseudo[i] > 0.5) ++outlier_hits;
        if (y[i] >= threshold) ++moe_hits;
      }
    if (outlier_total > 0) {
      fr.autoencoder.anomaly_rate =
          static_cast<double>(outlier_hits) / static_cast<double>(outlier_total);
      fr.moe.anomaly_rate =
          static_cast<double>(moe_hits) / static_cast<double>(outlier_total);
    }
    report.folds.push_back(fr);
  }

  // aggregates
  auto agg = [&](MetricRow FoldReport::* member, MetricRow* mean, MetricRow* sd) {
    auto fields = {&MetricRow::accuracy, &MetricRow::precision, &MetricRow::recall,
                   &MetricRow::f1,       &MetricRow::auc,       &MetricRow::ap,
                   &MetricRow::anomaly_rate};
    for (auto field : fields) {
      double m = 0.0;
      for (const auto& f : report.folds) m += (f.*member).*field;
      m /= static_cast<double>(report.folds.size());
      double s2 = 0.0;
      for (const auto& f : report.folds) {
        const double v = (f.*member).*field - m;
        s2 += v * v;
      }
      (*mean).*field = m;
      (*sd).*field = report.folds.size() > 1
                         ? std::sqrt(s2 / static_cast<double>(report.folds.size() - 1))
                         : 0.0;
    }
    mean->classification_na = (report.folds[0].*member).classification_na;
    mean->anomaly_na = (report.folds[0].*member).anomaly_na;
    sd->classification_na = mean->classification_na;
    sd->anomaly_na = mean->anomaly_na;
  };
  agg(&FoldReport::moe, &report.moe_mean, &report.moe_sd);
  agg(&FoldReport::lstm, &report.lstm_mean, &report.lstm_sd);
  agg(&FoldReport::transformer, &report.transformer_mean, &report.transformer_sd);
  agg(&FoldReport::autoencoder, &report.autoencoder_mean, &report.autoencoder_sd);

  // profile and complementarity from the log
  const auto n = static_cast<std::int64_t>(rows.size());
  numerics::Tensor g_all({n, 3});
  std::vector<int> labels;
  std::vector<datagen::FraudType> types;
  for (std::int64_t i = 0; i < n; ++i) {
    const auto& p = rows[static_cast<std::size_t>(i)];
    for (int j = 0; j < 3; ++j) g_all.at(i, j) = p.g[j];
    labels.push_back(p.label);
    types.push_back(p.fraud_type);
  }
  report.profile = moe::expert_activation_profile(g_all, labels, types);
  for (const auto& p : rows) {
    bool all_wrong = true;
    for (double e : p.e)
      if ((e >= 0.5) == (p.label != 0)) all_wrong = false;
    if (all_wrong && (p.y >= 0.5) == (p.label != 0)) {
      report.complementarity.count++;
      if (report.complementarity.exemplars.size() < 20)
        report.complementarity.exemplars.push_back(p);
    }
  }
  return report;
}

}  // namespace fraudlab::eval
