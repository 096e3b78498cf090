#include "fraudlab/cli/artifact.hpp"

#include <cstring>

#include <json.hpp>

#include "fraudlab/io.hpp"

namespace fraudlab::cli {

namespace {

using nlohmann::ordered_json;

ordered_json param_set_json(const numerics::ParamSet& params) {
  ordered_json arr = ordered_json::array();
  for (const auto& b : params.blocks) {
    ordered_json jb;
    jb["name"] = b.name;
    jb["shape"] = b.value.shape();
    jb["data"] = hex_encode_doubles(b.value.vec());
    arr.push_back(jb);
  }
  return arr;
}

void load_param_set(const ordered_json& arr, numerics::ParamSet& params) {
  if (arr.size() != params.blocks.size())
    throw data_error("artifact: parameter block count mismatch");
  for (std::size_t i = 0; i < params.blocks.size(); ++i) {
    const auto& jb = arr[i];
    auto& blk = params.blocks[i];
    if (jb.at("name").get<std::string>() != blk.name)
      throw data_error("artifact: parameter block '" +
                       jb.at("name").get<std::string>() + "' does not match '" +
                       blk.name + "'");
    const auto shape = jb.at("shape").get<std::vector<std::int64_t>>();
    if (shape != blk.value.shape())
      throw data_error("artifact: shape mismatch for block " + blk.name);
    auto data = hex_decode_doubles(jb.at("data").get<std::string>());
    if (data.size() != blk.value.vec().size())
      throw data_error("artifact: data length mismatch for block " + blk.name);
    blk.value.vec() = std::move(data);
  }
}

ordered_json curve_json(const experts::TrainResult& r) {
  ordered_json j;
  j["train_loss"] = r.train_curve;
  j["val_loss"] = r.val_curve;
  j["best_epoch"] = r.best_epoch;
  j["stopped_epoch"] = r.stopped_epoch;
  return j;
}

experts::TrainResult curve_from_json(const ordered_json& j) {
  experts::TrainResult r;
  r.train_curve = j.at("train_loss").get<std::vector<double>>();
  r.val_curve = j.at("val_loss").get<std::vector<double>>();
  r.best_epoch = j.at("best_epoch");
  r.stopped_epoch = j.at("stopped_epoch");
  return r;
}

}  // namespace

std::string hex_encode_doubles(const std::vector<double>& v) {
  static const char* k = "0123456789abcdef";
  std::string out;
  out.reserve(v.size() * 16);
  for (double d : v) {
    std::uint64_t bits;
    std::memcpy(&bits, &d, sizeof(bits));
    // little-endian byte order
    for (int byte = 0; byte < 8; ++byte) {
      const auto b = static_cast<unsigned>((bits >> (8 * byte)) & 0xff);
      out.push_back(k[b >> 4]);
      out.push_back(k[b & 0xf]);
    }
  }
  return out;
}

std::vector<double> hex_decode_doubles(const std::string& hex) {
  if (hex.size() % 16 != 0) throw data_error("artifact: bad hex array length");
  auto nibble = [](char c) -> std::uint64_t {
    if (c >= '0' && c <= '9') return static_cast<std::uint64_t>(c - '0');
    if (c >= 'a' && c <= 'f') return static_cast<std::uint64_t>(c - 'a' + 10);
    throw data_error("artifact: bad hex digit");
  };
  std::vector<double> out(hex.size() / 16);
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::uint64_t bits = 0;
    for (int byte = 0; byte < 8; ++byte) {
      const std::uint64_t hi = nibble(hex[i * 16 + static_cast<std::size_t>(byte) * 2]);
      const std::uint64_t lo = nibble(hex[i * 16 + static_cast<std::size_t>(byte) * 2 + 1]);
      bits |= ((hi << 4) | lo) << (8 * byte);
    }
    double d;
    std::memcpy(&d, &bits, sizeof(d));
    out[i] = d;
  }
  return out;
}

std::string artifact_to_json(const eval::TrainedPipeline& model,
                             const PipelineConfig& config) {
  ordered_json j;
  j["format_version"] = kArtifactVersion;
  j["config"] = config_to_text(config);

  ordered_json enc;
  ordered_json one_hots = ordered_json::array();
  for (const auto& oh : model.encoding.one_hots)
    one_hots.push_back({{"column", oh.column}, {"categories", oh.categories}});
  enc["one_hots"] = one_hots;
  ordered_json indexes = ordered_json::array();
  for (const auto& ix : model.encoding.indexes) {
    ordered_json m = ordered_json::object();
    for (const auto& [k, v] : ix.to_index) m[k] = v;
    indexes.push_back({{"column", ix.column}, {"to_index", m}});
  }
  enc["indexes"] = indexes;
  enc["cardinality_threshold"] = model.encoding.cardinality_threshold;
  j["encoding"] = enc;

  j["normalize"] = model.normalize;
  j["scaler"] = {{"min", hex_encode_doubles(model.scaler.min)},
                 {"max", hex_encode_doubles(model.scaler.max)}};
  j["window"] = model.window;
  j["window_days"] = model.window_days;

  j["lstm"] = {{"hidden", model.lstm->config().hidden},
               {"embed_dim", model.lstm->config().embed_dim},
               {"params", param_set_json(model.lstm->params())}};
  j["transformer"] = {{"d_model", model.transformer->config().d_model},
                      {"heads", model.transformer->config().heads},
                      {"ffn", model.transformer->config().ffn},
                      {"embed_dim", model.transformer->config().embed_dim},
                      {"window", model.transformer->config().window},
                      {"params", param_set_json(model.transformer->params())}};
  j["autoencoder"] = {{"hidden", model.autoencoder->config().hidden},
                      {"bottleneck", model.autoencoder->config().bottleneck},
                      {"tau", model.tau},
                      {"params", param_set_json(model.autoencoder->params())}};
  j["gate"] = {{"input_width", model.gate->input_width()},
               {"n_experts", model.gate->n_experts()},
               {"lambda", model.gate->config().lambda},
               {"on_expert_outputs", model.gate->config().on_expert_outputs},
               {"params", param_set_json(model.gate->params())}};
  j["class_weights"] = {{"w_pos", model.w_pos}, {"w_neg", model.w_neg}};
  j["training"] = {{"lstm", curve_json(model.lstm_curve)},
                   {"transformer", curve_json(model.transformer_curve)},
                   {"autoencoder", curve_json(model.ae_curve)},
                   {"gate", curve_json(model.gate_curve)}};
  return j.dump(2) + "\n";
}

void save_artifact(const std::string& path, const eval::TrainedPipeline& model,
                   const PipelineConfig& config) {
  write_text(path, artifact_to_json(model, config));
}

eval::TrainedPipeline artifact_from_json(const std::string& text,
                                         PipelineConfig* config_out) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const std::exception& e) {
    throw data_error(std::string("artifact: invalid json: ") + e.what());
  }
  if (!j.contains("format_version") ||
      j.at("format_version").get<int>() != kArtifactVersion)
    throw data_error("artifact: unsupported format version");

  PipelineConfig config = parse_config_text(j.at("config").get<std::string>());
  if (config_out) *config_out = config;

  eval::TrainedPipeline model;
  const auto& enc = j.at("encoding");
  model.encoding.cardinality_threshold = enc.at("cardinality_threshold");
  for (const auto& joh : enc.at("one_hots")) {
    preprocess::CategoricalEncoding::OneHot oh;
    oh.column = joh.at("column");
    oh.categories = joh.at("categories").get<std::vector<std::string>>();
    model.encoding.one_hots.push_back(std::move(oh));
  }
  std::vector<std::int64_t> index_vocab;
  for (const auto& jix : enc.at("indexes")) {
    preprocess::CategoricalEncoding::Index ix;
    ix.column = jix.at("column");
    for (const auto& [k, v] : jix.at("to_index").items())
      ix.to_index[k] = v.get<std::int64_t>();
    index_vocab.push_back(static_cast<std::int64_t>(ix.to_index.size()) + 1);
    model.encoding.indexes.push_back(std::move(ix));
  }

  model.normalize = j.at("normalize");
  model.scaler.min = hex_decode_doubles(j.at("scaler").at("min"));
  model.scaler.max = hex_decode_doubles(j.at("scaler").at("max"));
  model.window = j.at("window");
  model.window_days = j.at("window_days");

  const auto width = static_cast<std::int64_t>(model.scaler.min.size());

  experts::LstmConfig lstm_cfg{j.at("lstm").at("hidden"),
                               j.at("lstm").at("embed_dim")};
  model.lstm = std::make_unique<experts::LstmExpert>(width, index_vocab, lstm_cfg, 0);
  load_param_set(j.at("lstm").at("params"), model.lstm->params());

  experts::TransformerConfig tf_cfg{
      j.at("transformer").at("d_model"), j.at("transformer").at("heads"),
      j.at("transformer").at("ffn"), j.at("transformer").at("embed_dim"),
      j.at("transformer").at("window")};
  model.transformer =
      std::make_unique<experts::TransformerExpert>(width, index_vocab, tf_cfg, 0);
  load_param_set(j.at("transformer").at("params"), model.transformer->params());

  experts::AutoencoderConfig ae_cfg{j.at("autoencoder").at("hidden"),
                                    j.at("autoencoder").at("bottleneck")};
  model.autoencoder = std::make_unique<experts::AutoencoderExpert>(width, ae_cfg, 0);
  load_param_set(j.at("autoencoder").at("params"), model.autoencoder->params());
  model.tau = j.at("autoencoder").at("tau");
  model.autoencoder->set_tau(model.tau);

  moe::GateConfig gate_cfg{j.at("gate").at("lambda"),
                           j.at("gate").at("on_expert_outputs")};
  model.gate = std::make_unique<moe::GateNetwork>(
      j.at("gate").at("input_width").get<std::int64_t>(),
      j.at("gate").at("n_experts").get<int>(), gate_cfg, 0);
  load_param_set(j.at("gate").at("params"), model.gate->params());

  model.w_pos = j.at("class_weights").at("w_pos");
  model.w_neg = j.at("class_weights").at("w_neg");
  model.lstm_curve = curve_from_json(j.at("training").at("lstm"));
  model.transformer_curve = curve_from_json(j.at("training").at("transformer"));
  model.ae_curve = curve_from_json(j.at("training").at("autoencoder"));
  model.gate_curve = curve_from_json(j.at("training").at("gate"));
  return model;
}

eval::TrainedPipeline load_artifact(const std::string& path,
                                    PipelineConfig* config_out) {
  return artifact_from_json(read_text(path), config_out);
}

}  // namespace fraudlab::cli
