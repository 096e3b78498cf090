#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fraudlab/datagen/schema.hpp"
#include "fraudlab/numerics/tensor.hpp"

namespace fraudlab::preprocess {

// Raw per-transaction table before encoding: 11 numeric columns plus the
// categorical columns (3 low-cardinality enums and 2 identifier columns).
struct RawFrame {
  std::vector<std::string> numeric_names;
  numerics::Tensor numeric;  // n x numeric_names.size()
  std::vector<std::string> cat_names;
  std::vector<std::vector<std::string>> cat_values;  // [column][row]
  std::vector<int> labels;  // 1 = fraud
  std::vector<datagen::FraudType> fraud_types;
  std::vector<std::int64_t> cardholder_ids;
  std::vector<double> times;

  std::int64_t rows() const { return numeric.rank() == 2 ? numeric.dim(0) : 0; }
};

RawFrame raw_frame_from_records(const std::vector<datagen::TransactionRecord>& records);

// Fitted categorical encoding. Columns whose fit-split distinct count stays
// at or below the cardinality threshold become one-hot blocks; the rest
// become integer index columns (0 reserved for unseen values) that feed
// embedding tables inside the sequence experts.
struct CategoricalEncoding {
  int cardinality_threshold = 16;
  struct OneHot {
    std::string column;
    std::vector<std::string> categories;  // lexicographic
  };
  struct Index {
    std::string column;
    std::map<std::string, std::int64_t> to_index;  // 1-based; 0 = unknown
  };
  std::vector<OneHot> one_hots;
  std::vector<Index> indexes;
};

CategoricalEncoding encode_fit(const RawFrame& raw,
                               const std::vector<std::int64_t>& fit_rows,
                               int cardinality_threshold = 16);

// Encoded feature table consumed by the models.
struct FeatureFrame {
  std::vector<std::string> columns;  // numeric then one-hot blocks
  numerics::Tensor X;                // n x columns.size()
  std::vector<std::string> index_names;
  std::vector<std::vector<std::int64_t>> index_cols;  // [column][row]
  std::vector<std::int64_t> index_vocab;              // incl. unknown slot 0
  std::vector<int> labels;
  std::vector<datagen::FraudType> fraud_types;
  std::vector<std::int64_t> cardholder_ids;
  std::vector<double> times;
  std::vector<int> fold;  // -1 until assigned

  std::int64_t rows() const { return X.rank() == 2 ? X.dim(0) : 0; }
  std::int64_t width() const { return X.rank() == 2 ? X.dim(1) : 0; }
};

FeatureFrame encode_apply(const CategoricalEncoding& enc, const RawFrame& raw);

}  // namespace fraudlab::preprocess
