#pragma once

#include <string>
#include <vector>

#include "fraudlab/datagen/generator.hpp"
#include "fraudlab/datagen/schema.hpp"

namespace fraudlab::datagen {

// Column order of the emitted files: the 15 schema variables in snake_case
// followed by label and fraud_type. Floats are written with 6 decimals,
// geolocation as "lat;lon", time as fractional hours since stream start.
extern const std::vector<std::string> kDatasetColumns;

std::string to_csv(const std::vector<TransactionRecord>& stream);
std::string to_jsonl(const std::vector<TransactionRecord>& stream);

void write_dataset_csv(const std::string& path,
                       const std::vector<TransactionRecord>& stream);
void write_dataset_jsonl(const std::string& path,
                         const std::vector<TransactionRecord>& stream);
std::vector<TransactionRecord> read_dataset_csv(const std::string& path);

// Realized statistics recorded next to the dataset files.
struct GenerationManifest {
  GeneratorConfig config;
  std::int64_t rows = 0;
  std::int64_t fraud_rows = 0;
  double realized_fraud_rate = 0.0;
  std::vector<double> typology_shares;  // enum order, over fraud rows
  double amount_mean = 0.0;
  double amount_sd = 0.0;
  double frequency_mean = 0.0;
  double geo_deviation_mean = 0.0;
  std::string csv_digest;
  std::string jsonl_digest;
};

GenerationManifest summarize(const GeneratorConfig& config,
                             const std::vector<TransactionRecord>& stream);
std::string manifest_to_json(const GenerationManifest& m);
void write_manifest(const std::string& path, const GenerationManifest& m);

std::string render_ip(std::int64_t id);
std::int64_t parse_ip(const std::string& s);

}  // namespace fraudlab::datagen
