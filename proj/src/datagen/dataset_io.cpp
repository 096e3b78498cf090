#include "fraudlab/datagen/dataset_io.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fraudlab/sha256.hpp"

namespace fraudlab::datagen {

std::string to_string(TransactionType t) {
  switch (t) {
    case TransactionType::Purchase: return "Purchase";
    case TransactionType::Withdrawal: return "Withdrawal";
    case TransactionType::OnlinePayment: return "OnlinePayment";
  }
  return "Purchase";
}

std::string to_string(DeviceType d) {
  switch (d) {
    case DeviceType::Mobile: return "Mobile";
    case DeviceType::Desktop: return "Desktop";
    case DeviceType::Tablet: return "Tablet";
    case DeviceType::Pos: return "POS";
    case DeviceType::Atm: return "ATM";
  }
  return "Mobile";
}

std::string to_string(FraudType f) {
  switch (f) {
    case FraudType::None: return "None";
    case FraudType::StolenCard: return "StolenCard";
    case FraudType::IdentityFraud: return "IdentityFraud";
    case FraudType::OnlinePaymentFraud: return "OnlinePaymentFraud";
    case FraudType::Other: return "Other";
  }
  return "None";
}

TransactionType transaction_type_from(const std::string& s) {
  if (s == "Purchase") return TransactionType::Purchase;
  if (s == "Withdrawal") return TransactionType::Withdrawal;
  if (s == "OnlinePayment") return TransactionType::OnlinePayment;
  throw data_error("unknown transaction_type: " + s);
}

DeviceType device_type_from(const std::string& s) {
  if (s == "Mobile") return DeviceType::Mobile;
  if (s == "Desktop") return DeviceType::Desktop;
  if (s == "Tablet") return DeviceType::Tablet;
  if (s == "POS") return DeviceType::Pos;
  if (s == "ATM") return DeviceType::Atm;
  throw data_error("unknown device_information: " + s);
}

FraudType fraud_type_from(const std::string& s) {
  if (s == "None") return FraudType::None;
  if (s == "StolenCard") return FraudType::StolenCard;
  if (s == "IdentityFraud") return FraudType::IdentityFraud;
  if (s == "OnlinePaymentFraud") return FraudType::OnlinePaymentFraud;
  if (s == "Other") return FraudType::Other;
  throw data_error("unknown fraud_type: " + s);
}

int merchant_category_from(const std::string& s) {
  const auto& cats = merchant_categories();
  for (std::size_t i = 0; i < cats.size(); ++i)
    if (cats[i] == s) return static_cast<int>(i);
  throw data_error("unknown merchant_category: " + s);
}

const std::vector<std::string> kDatasetColumns = {
    "transaction_amount",      "transaction_type",
    "time_of_transaction",     "merchant_category",
    "geolocation",             "cardholder_id",
    "transaction_frequency",   "device_information",
    "ip_address",              "account_balance",
    "avg_transaction_amount",  "avg_transaction_interval",
    "geolocation_deviation",   "anomaly_score",
    "spending_behavior_score", "label",
    "fraud_type"};

std::string render_ip(std::int64_t id) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "10.%d.%d.%d",
                static_cast<int>((id >> 16) & 0xff),
                static_cast<int>((id >> 8) & 0xff),
                static_cast<int>(id & 0xff));
  // ids above 24 bits keep a distinct textual form via a port-like suffix
  if (id >> 24) {
    char big[48];
    std::snprintf(big, sizeof(big), "%s:%" PRId64, buf, id >> 24);
    return big;
  }
  return buf;
}

std::int64_t parse_ip(const std::string& s) {
  int a = 0, b = 0, c = 0, d = 0;
  long long hi = 0;
  if (std::sscanf(s.c_str(), "%d.%d.%d.%d:%lld", &a, &b, &c, &d, &hi) >= 4)
    return (static_cast<std::int64_t>(hi) << 24) | (b << 16) | (c << 8) | d;
  throw data_error("unparsable ip_address: " + s);
}

namespace {

void append_f6(std::string& out, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  out += buf;
}

}  // namespace

std::string to_csv(const std::vector<TransactionRecord>& stream) {
  std::string out;
  out.reserve(stream.size() * 160 + 256);
  for (std::size_t i = 0; i < kDatasetColumns.size(); ++i) {
    if (i) out += ',';
    out += kDatasetColumns[i];
  }
  out += '\n';
  for (const auto& r : stream) {
    append_f6(out, r.transaction_amount);
    out += ',';
    out += to_string(r.transaction_type);
    out += ',';
    append_f6(out, r.time_of_transaction);
    out += ',';
    out += merchant_categories()[static_cast<std::size_t>(r.merchant_category)];
    out += ',';
    append_f6(out, r.geo_lat);
    out += ';';
    append_f6(out, r.geo_lon);
    out += ',';
    out += std::to_string(r.cardholder_id);
    out += ',';
    out += std::to_string(r.transaction_frequency);
    out += ',';
    out += to_string(r.device_information);
    out += ',';
    out += render_ip(r.ip_address);
    out += ',';
    append_f6(out, r.account_balance);
    out += ',';
    append_f6(out, r.avg_transaction_amount);
    out += ',';
    append_f6(out, r.avg_transaction_interval);
    out += ',';
    append_f6(out, r.geolocation_deviation);
    out += ',';
    append_f6(out, r.anomaly_score);
    out += ',';
    append_f6(out, r.spending_behavior_score);
    out += ',';
    out += r.fraud ? "fraud" : "legit";
    out += ',';
    out += to_string(r.fraud_type);
    out += '\n';
  }
  return out;
}

std::string to_jsonl(const std::vector<TransactionRecord>& stream) {
  std::string out;
  out.reserve(stream.size() * 320);
  for (const auto& r : stream) {
    out += "{\"transaction_amount\":";
    append_f6(out, r.transaction_amount);
    out += ",\"transaction_type\":\"" + to_string(r.transaction_type) + "\"";
    out += ",\"time_of_transaction\":";
    append_f6(out, r.time_of_transaction);
    out += ",\"merchant_category\":\"" +
           merchant_categories()[static_cast<std::size_t>(r.merchant_category)] + "\"";
    out += ",\"geolocation\":[";
    append_f6(out, r.geo_lat);
    out += ',';
    append_f6(out, r.geo_lon);
    out += "],\"cardholder_id\":" + std::to_string(r.cardholder_id);
    out += ",\"transaction_frequency\":" + std::to_string(r.transaction_frequency);
    out += ",\"device_information\":\"" + to_string(r.device_information) + "\"";
    out += ",\"ip_address\":\"" + render_ip(r.ip_address) + "\"";
    out += ",\"account_balance\":";
    append_f6(out, r.account_balance);
    out += ",\"avg_transaction_amount\":";
    append_f6(out, r.avg_transaction_amount);
    out += ",\"avg_transaction_interval\":";
    append_f6(out, r.avg_transaction_interval);
    out += ",\"geolocation_deviation\":";
    append_f6(out, r.geolocation_deviation);
    out += ",\"anomaly_score\":";
    append_f6(out, r.anomaly_score);
    out += ",\"spending_behavior_score\":";
    append_f6(out, r.spending_behavior_score);
    out += ",\"label\":\"";
    out += r.fraud ? "fraud" : "legit";
    out += "\",\"fraud_type\":\"" + to_string(r.fraud_type) + "\"}\n";
  }
  return out;
}

namespace {

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw data_error("cannot open for writing: " + path);
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!f) throw data_error("write failed: " + path);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == sep) {
      out.push_back(line.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

}  // namespace

void write_dataset_csv(const std::string& path,
                       const std::vector<TransactionRecord>& stream) {
  write_text(path, to_csv(stream));
}

void write_dataset_jsonl(const std::string& path,
                         const std::vector<TransactionRecord>& stream) {
  write_text(path, to_jsonl(stream));
}

std::vector<TransactionRecord> read_dataset_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw data_error("cannot open dataset: " + path);
  std::string line;
  if (!std::getline(f, line)) throw data_error("empty dataset file: " + path);
  const auto header = split(line, ',');
  if (header.size() != kDatasetColumns.size())
    throw data_error("dataset schema mismatch: expected " +
                     std::to_string(kDatasetColumns.size()) + " columns, got " +
                     std::to_string(header.size()));
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] != kDatasetColumns[i])
      throw data_error("dataset column " + std::to_string(i) + " is '" +
                       header[i] + "', expected '" + kDatasetColumns[i] + "'");

  std::vector<TransactionRecord> out;
  std::size_t line_no = 1;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != kDatasetColumns.size())
      throw data_error("dataset row " + std::to_string(line_no) +
                       ": wrong column count");
    try {
      TransactionRecord r;
      r.transaction_amount = std::stod(cells[0]);
      r.transaction_type = transaction_type_from(cells[1]);
      r.time_of_transaction = std::stod(cells[2]);
      r.merchant_category = merchant_category_from(cells[3]);
      const auto geo = split(cells[4], ';');
      if (geo.size() != 2) throw data_error("bad geolocation cell");
      r.geo_lat = std::stod(geo[0]);
      r.geo_lon = std::stod(geo[1]);
      r.cardholder_id = std::stoll(cells[5]);
      r.transaction_frequency = std::stoi(cells[6]);
      r.device_information = device_type_from(cells[7]);
      r.ip_address = parse_ip(cells[8]);
      r.account_balance = std::stod(cells[9]);
      r.avg_transaction_amount = std::stod(cells[10]);
      r.avg_transaction_interval = std::stod(cells[11]);
      r.geolocation_deviation = std::stod(cells[12]);
      r.anomaly_score = std::stod(cells[13]);
      r.spending_behavior_score = std::stod(cells[14]);
      if (cells[15] == "fraud")
        r.fraud = true;
      else if (cells[15] == "legit")
        r.fraud = false;
      else
        throw data_error("unknown label: " + cells[15]);
      r.fraud_type = fraud_type_from(cells[16]);
      if ((r.fraud_type == FraudType::None) == r.fraud)
        throw data_error("label / fraud_type inconsistency");
      out.push_back(r);
    } catch (const Error&) {
      throw;
    } catch (const std::exception& e) {
      throw data_error("dataset row " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

GenerationManifest summarize(const GeneratorConfig& config,
                             const std::vector<TransactionRecord>& stream) {
  GenerationManifest m;
  m.config = config;
  m.rows = static_cast<std::int64_t>(stream.size());
  m.typology_shares.assign(4, 0.0);
  double sum = 0.0, sum2 = 0.0, freq = 0.0, geo = 0.0;
  for (const auto& r : stream) {
    if (r.fraud) {
      m.fraud_rows++;
      const int t = static_cast<int>(r.fraud_type) - 1;
      if (t >= 0 && t < 4) m.typology_shares[static_cast<std::size_t>(t)] += 1.0;
    }
    sum += r.transaction_amount;
    sum2 += r.transaction_amount * r.transaction_amount;
    freq += r.transaction_frequency;
    geo += r.geolocation_deviation;
  }
  const double n = std::max<double>(1.0, static_cast<double>(m.rows));
  m.realized_fraud_rate = static_cast<double>(m.fraud_rows) / n;
  if (m.fraud_rows > 0)
    for (double& s : m.typology_shares) s /= static_cast<double>(m.fraud_rows);
  m.amount_mean = sum / n;
  m.amount_sd = std::sqrt(std::max(0.0, sum2 / n - m.amount_mean * m.amount_mean));
  m.frequency_mean = freq / n;
  m.geo_deviation_mean = geo / n;
  return m;
}

std::string manifest_to_json(const GenerationManifest& m) {
  nlohmann::ordered_json j;
  j["config"] = {{"corpus_size", m.config.corpus_size},
                 {"n_accounts", m.config.n_accounts},
                 {"horizon_days", m.config.horizon_days},
                 {"fraud_rate", m.config.fraud_rate},
                 {"typology_mix",
                  {m.config.mix.stolen_card, m.config.mix.identity_fraud,
                   m.config.mix.online_payment_fraud, m.config.mix.other}},
                 {"iforest_trees", m.config.iforest_trees},
                 {"iforest_subsample", m.config.iforest_subsample},
                 {"seed", m.config.seed}};
  j["rows"] = m.rows;
  j["fraud_rows"] = m.fraud_rows;
  j["realized_fraud_rate"] = m.realized_fraud_rate;
  j["typology_shares"] = m.typology_shares;
  j["amount_mean"] = m.amount_mean;
  j["amount_sd"] = m.amount_sd;
  j["frequency_mean"] = m.frequency_mean;
  j["geo_deviation_mean"] = m.geo_deviation_mean;
  if (!m.csv_digest.empty()) j["csv_sha256"] = m.csv_digest;
  if (!m.jsonl_digest.empty()) j["jsonl_sha256"] = m.jsonl_digest;
  return j.dump(2) + "\n";
}

void write_manifest(const std::string& path, const GenerationManifest& m) {
  write_text(path, manifest_to_json(m));
}

}  // namespace fraudlab::datagen
