#include "fraudlab/cli/config.hpp"

#include <cstdio>
#include <functional>
#include <sstream>

#include "fraudlab/io.hpp"

namespace fraudlab::cli {

namespace {

bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1" || v == "on") return true;
  if (v == "false" || v == "0" || v == "off") return false;
  throw config_error("config: boolean expected for '" + key + "', got '" + v + "'");
}

}  // namespace

void PipelineConfig::validate() const {
  if (generator.corpus_size < 1) throw config_error("config: corpus_size must be >= 1");
  if (generator.n_accounts < 1) throw config_error("config: accounts must be >= 1");
  if (generator.horizon_days < 1) throw config_error("config: horizon_days must be >= 1");
  if (generator.fraud_rate < 0.0 || generator.fraud_rate >= 0.5)
    throw config_error("config: fraud_rate must lie in [0, 0.5)");
  if (std::abs(generator.mix.sum() - 1.0) > 1e-9)
    throw config_error("config: typology mix must sum to 1");
  if (generator.iforest_trees < 1) throw config_error("config: iforest_trees must be >= 1");
  if (generator.iforest_subsample < 2)
    throw config_error("config: iforest_subsample must be >= 2");
  if (pipeline.k_folds < 2) throw config_error("config: folds must be >= 2");
  if (pipeline.window < 1) throw config_error("config: window must be >= 1");
  if (pipeline.window_days < 0) throw config_error("config: window_days must be >= 0");
  if (pipeline.smote_ratio <= 0.0 || pipeline.smote_ratio > 1.0)
    throw config_error("config: smote_ratio must lie in (0, 1]");
  if (pipeline.smote_k < 1) throw config_error("config: smote_k must be >= 1");
  if (pipeline.cardinality_threshold < 1)
    throw config_error("config: cardinality_threshold must be >= 1");
  if (pipeline.gate_lambda < 0.0) throw config_error("config: gate_lambda must be >= 0");
  if (pipeline.decision_threshold <= 0.0 || pipeline.decision_threshold >= 1.0)
    throw config_error("config: decision_threshold must lie in (0, 1)");
  if (pipeline.val_fraction <= 0.0 || pipeline.val_fraction >= 0.5)
    throw config_error("config: val_fraction must lie in (0, 0.5)");
  if (pipeline.train.learning_rate <= 0.0)
    throw config_error("config: learning_rate must be > 0");
  if (pipeline.train.batch_size < 1) throw config_error("config: batch_size must be >= 1");
  if (pipeline.train.max_epochs < 1) throw config_error("config: max_epochs must be >= 1");
  if (pipeline.train.patience < 1) throw config_error("config: patience must be >= 1");
  if (pipeline.lstm.hidden < 1) throw config_error("config: lstm_hidden must be >= 1");
  if (pipeline.lstm.embed_dim < 1) throw config_error("config: embed_dim must be >= 1");
  if (pipeline.transformer.d_model < 1 || pipeline.transformer.heads < 1 ||
      pipeline.transformer.ffn < 1)
    throw config_error("config: transformer dimensions must be >= 1");
  if (pipeline.transformer.d_model % pipeline.transformer.heads != 0)
    throw config_error("config: heads must divide d_model");
  if (pipeline.autoencoder.bottleneck < 1 ||
      pipeline.autoencoder.hidden < pipeline.autoencoder.bottleneck)
    throw config_error("config: autoencoder needs hidden >= bottleneck >= 1");
  if (variant_card_fraction <= 0.0 || variant_card_fraction > 1.0)
    throw config_error("config: variant_card_fraction must lie in (0, 1]");
  if (variant_folds < 2) throw config_error("config: variant_folds must be >= 2");
}

PipelineConfig parse_config_text(const std::string& text) {
  PipelineConfig c;
  std::map<std::string, std::function<void(const std::string&)>> setters;
  auto set_i64 = [](std::int64_t* p) {
    return [p](const std::string& v) { *p = std::stoll(v); };
  };
  auto set_int = [](int* p) {
    return [p](const std::string& v) { *p = std::stoi(v); };
  };
  auto set_f = [](double* p) {
    return [p](const std::string& v) { *p = std::stod(v); };
  };
  auto set_u64 = [](std::uint64_t* p) {
    return [p](const std::string& v) { *p = std::stoull(v); };
  };

  setters["corpus_size"] = set_i64(&c.generator.corpus_size);
  setters["accounts"] = set_i64(&c.generator.n_accounts);
  setters["horizon_days"] = set_i64(&c.generator.horizon_days);
  setters["fraud_rate"] = set_f(&c.generator.fraud_rate);
  setters["mix_stolen_card"] = set_f(&c.generator.mix.stolen_card);
  setters["mix_identity_fraud"] = set_f(&c.generator.mix.identity_fraud);
  setters["mix_online_payment_fraud"] = set_f(&c.generator.mix.online_payment_fraud);
  setters["mix_other"] = set_f(&c.generator.mix.other);
  setters["iforest_trees"] = set_int(&c.generator.iforest_trees);
  setters["iforest_subsample"] = set_i64(&c.generator.iforest_subsample);
  setters["seed"] = [&c](const std::string& v) {
    c.generator.seed = std::stoull(v);
    c.pipeline.seed = c.generator.seed;
  };
  setters["folds"] = set_int(&c.pipeline.k_folds);
  setters["window"] = [&c](const std::string& v) {
    c.pipeline.window = std::stoll(v);
    c.pipeline.transformer.window = c.pipeline.window;
  };
  setters["window_days"] = set_i64(&c.pipeline.window_days);
  setters["normalize"] = [&c](const std::string& v) {
    c.pipeline.normalize = parse_bool(v, "normalize");
  };
  setters["smote"] = [&c](const std::string& v) {
    c.pipeline.smote = parse_bool(v, "smote");
  };
  setters["smote_ratio"] = set_f(&c.pipeline.smote_ratio);
  setters["smote_k"] = set_int(&c.pipeline.smote_k);
  setters["cardinality_threshold"] = set_int(&c.pipeline.cardinality_threshold);
  setters["gate_lambda"] = set_f(&c.pipeline.gate_lambda);
  setters["gate_on_expert_outputs"] = [&c](const std::string& v) {
    c.pipeline.gate_on_expert_outputs = parse_bool(v, "gate_on_expert_outputs");
  };
  setters["decision_threshold"] = set_f(&c.pipeline.decision_threshold);
  setters["val_fraction"] = set_f(&c.pipeline.val_fraction);
  setters["learning_rate"] = set_f(&c.pipeline.train.learning_rate);
  setters["batch_size"] = set_i64(&c.pipeline.train.batch_size);
  setters["max_epochs"] = set_int(&c.pipeline.train.max_epochs);
  setters["patience"] = set_int(&c.pipeline.train.patience);
  setters["lstm_hidden"] = set_i64(&c.pipeline.lstm.hidden);
  setters["embed_dim"] = [&c](const std::string& v) {
    c.pipeline.lstm.embed_dim = std::stoll(v);
    c.pipeline.transformer.embed_dim = c.pipeline.lstm.embed_dim;
  };
  setters["d_model"] = set_i64(&c.pipeline.transformer.d_model);
  setters["heads"] = set_i64(&c.pipeline.transformer.heads);
  setters["ffn"] = set_i64(&c.pipeline.transformer.ffn);
  setters["ae_hidden"] = set_i64(&c.pipeline.autoencoder.hidden);
  setters["ae_bottleneck"] = set_i64(&c.pipeline.autoencoder.bottleneck);
  setters["threads"] = set_int(&c.pipeline.threads);
  setters["variant_card_fraction"] = set_f(&c.variant_card_fraction);
  setters["variant_folds"] = set_int(&c.variant_folds);
  setters["out_dir"] = [&c](const std::string& v) { c.out_dir = v; };

  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::istringstream ls(line);
    std::string key, value, extra;
    if (!(ls >> key)) continue;  // blank line
    if (!(ls >> value))
      throw config_error("config line " + std::to_string(line_no) +
                         ": missing value for '" + key + "'");
    if (ls >> extra)
      throw config_error("config line " + std::to_string(line_no) +
                         ": trailing tokens after '" + key + "'");
    const auto it = setters.find(key);
    if (it == setters.end())
      throw config_error("config: unknown key '" + key + "'");
    try {
      it->second(value);
    } catch (const Error&) {
      throw;
    } catch (const std::exception&) {
      throw config_error("config: invalid value '" + value + "' for '" + key + "'");
    }
  }
  c.validate();
  return c;
}

PipelineConfig load_config(const std::string& path) {
  std::string text;
  try {
    text = read_text(path);
  } catch (const Error& e) {
    throw config_error(e.what());
  }
  return parse_config_text(text);
}

std::string config_to_text(const PipelineConfig& c) {
  std::ostringstream out;
  auto f = [&](const char* key, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out << key << ' ' << buf << '\n';
  };
  out << "corpus_size " << c.generator.corpus_size << '\n';
  out << "accounts " << c.generator.n_accounts << '\n';
  out << "horizon_days " << c.generator.horizon_days << '\n';
  f("fraud_rate", c.generator.fraud_rate);
  f("mix_stolen_card", c.generator.mix.stolen_card);
  f("mix_identity_fraud", c.generator.mix.identity_fraud);
  f("mix_online_payment_fraud", c.generator.mix.online_payment_fraud);
  f("mix_other", c.generator.mix.other);
  out << "iforest_trees " << c.generator.iforest_trees << '\n';
  out << "iforest_subsample " << c.generator.iforest_subsample << '\n';
  out << "seed " << c.generator.seed << '\n';
  out << "folds " << c.pipeline.k_folds << '\n';
  out << "window " << c.pipeline.window << '\n';
  out << "window_days " << c.pipeline.window_days << '\n';
  out << "normalize " << (c.pipeline.normalize ? "true" : "false") << '\n';
  out << "smote " << (c.pipeline.smote ? "true" : "false") << '\n';
  f("smote_ratio", c.pipeline.smote_ratio);
  out << "smote_k " << c.pipeline.smote_k << '\n';
  out << "cardinality_threshold " << c.pipeline.cardinality_threshold << '\n';
  f("gate_lambda", c.pipeline.gate_lambda);
  out << "gate_on_expert_outputs "
      << (c.pipeline.gate_on_expert_outputs ? "true" : "false") << '\n';
  f("decision_threshold", c.pipeline.decision_threshold);
  f("val_fraction", c.pipeline.val_fraction);
  f("learning_rate", c.pipeline.train.learning_rate);
  out << "batch_size " << c.pipeline.train.batch_size << '\n';
  out << "max_epochs " << c.pipeline.train.max_epochs << '\n';
  out << "patience " << c.pipeline.train.patience << '\n';
  out << "lstm_hidden " << c.pipeline.lstm.hidden << '\n';
  out << "embed_dim " << c.pipeline.lstm.embed_dim << '\n';
  out << "d_model " << c.pipeline.transformer.d_model << '\n';
  out << "heads " << c.pipeline.transformer.heads << '\n';
  out << "ffn " << c.pipeline.transformer.ffn << '\n';
  out << "ae_hidden " << c.pipeline.autoencoder.hidden << '\n';
  out << "ae_bottleneck " << c.pipeline.autoencoder.bottleneck << '\n';
  out << "threads " << c.pipeline.threads << '\n';
  f("variant_card_fraction", c.variant_card_fraction);
  out << "variant_folds " << c.variant_folds << '\n';
  out << "out_dir " << c.out_dir << '\n';
  return out.str();
}

}  // namespace fraudlab::cli
