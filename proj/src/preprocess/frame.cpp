#include "fraudlab/preprocess/frame.hpp"

#include <algorithm>
#include <set>

#include "fraudlab/datagen/dataset_io.hpp"

namespace fraudlab::preprocess {

RawFrame raw_frame_from_records(
    const std::vector<datagen::TransactionRecord>& records) {
  RawFrame f;
  f.numeric_names = {"transaction_amount",     "time_of_transaction",
                     "geo_lat",                "geo_lon",
                     "transaction_frequency",  "account_balance",
                     "avg_transaction_amount", "avg_transaction_interval",
                     "geolocation_deviation",  "anomaly_score",
                     "spending_behavior_score"};
  const auto n = static_cast<std::int64_t>(records.size());
  f.numeric = numerics::Tensor({n, static_cast<std::int64_t>(f.numeric_names.size())});
  f.cat_names = {"transaction_type", "merchant_category", "device_information",
                 "ip_address", "cardholder_id"};
  f.cat_values.assign(f.cat_names.size(), {});
  for (auto& col : f.cat_values) col.reserve(records.size());

  for (std::int64_t i = 0; i < n; ++i) {
    const auto& r = records[static_cast<std::size_t>(i)];
    double* row = f.numeric.data() + i * f.numeric.dim(1);
    row[0] = r.transaction_amount;
    row[1] = r.time_of_transaction;
    row[2] = r.geo_lat;
    row[3] = r.geo_lon;
    row[4] = static_cast<double>(r.transaction_frequency);
    row[5] = r.account_balance;
    row[6] = r.avg_transaction_amount;
    row[7] = r.avg_transaction_interval;
    row[8] = r.geolocation_deviation;
    row[9] = r.anomaly_score;
    row[10] = r.spending_behavior_score;
    f.cat_values[0].push_back(datagen::to_string(r.transaction_type));
    f.cat_values[1].push_back(
        datagen::merchant_categories()[static_cast<std::size_t>(r.merchant_category)]);
    f.cat_values[2].push_back(datagen::to_string(r.device_information));
    f.cat_values[3].push_back(datagen::render_ip(r.ip_address));
    f.cat_values[4].push_back(std::to_string(r.cardholder_id));
    f.labels.push_back(r.fraud ? 1 : 0);
    f.fraud_types.push_back(r.fraud_type);
    f.cardholder_ids.push_back(r.cardholder_id);
    f.times.push_back(r.time_of_transaction);
  }
  return f;
}

CategoricalEncoding encode_fit(const RawFrame& raw,
                               const std::vector<std::int64_t>& fit_rows,
                               int cardinality_threshold) {
  CategoricalEncoding enc;
  enc.cardinality_threshold = cardinality_threshold;
  for (std::size_t c = 0; c < raw.cat_names.size(); ++c) {
    std::set<std::string> distinct;
    for (std::int64_t r : fit_rows)
      distinct.insert(raw.cat_values[c][static_cast<std::size_t>(r)]);
    if (static_cast<int>(distinct.size()) <= cardinality_threshold) {
      CategoricalEncoding::OneHot oh;
      oh.column = raw.cat_names[c];
      oh.categories.assign(distinct.begin(), distinct.end());  // set is sorted
      enc.one_hots.push_back(std::move(oh));
    } else {
      CategoricalEncoding::Index ix;
      ix.column = raw.cat_names[c];
      std::int64_t next = 1;
      for (const auto& v : distinct) ix.to_index[v] = next++;
      enc.indexes.push_back(std::move(ix));
    }
  }
  return enc;
}

FeatureFrame encode_apply(const CategoricalEncoding& enc, const RawFrame& raw) {
  FeatureFrame f;
  const std::int64_t n = raw.rows();

  f.columns = raw.numeric_names;
  for (const auto& oh : enc.one_hots)
    for (const auto& cat : oh.categories) f.columns.push_back(oh.column + "=" + cat);

  // column names must stay unique
  {
    std::set<std::string> seen;
    for (const auto& c : f.columns)
      if (!seen.insert(c).second) throw data_error("frame: duplicate column " + c);
  }

  const auto width = static_cast<std::int64_t>(f.columns.size());
  f.X = numerics::Tensor({n, width});
  const std::int64_t numeric_width = raw.numeric.dim(1);
  for (std::int64_t i = 0; i < n; ++i)
    std::copy(raw.numeric.data() + i * numeric_width,
              raw.numeric.data() + (i + 1) * numeric_width, f.X.data() + i * width);

  std::int64_t offset = numeric_width;
  for (const auto& oh : enc.one_hots) {
    const auto cat_col = static_cast<std::size_t>(
        std::find(raw.cat_names.begin(), raw.cat_names.end(), oh.column) -
        raw.cat_names.begin());
    for (std::int64_t i = 0; i < n; ++i) {
      const std::string& v = raw.cat_values[cat_col][static_cast<std::size_t>(i)];
      const auto it =
          std::lower_bound(oh.categories.begin(), oh.categories.end(), v);
      // unseen category: all-zeros one-hot row
      if (it != oh.categories.end() && *it == v)
        f.X.at(i, offset + (it - oh.categories.begin())) = 1.0;
    }
    offset += static_cast<std::int64_t>(oh.categories.size());
  }

  for (const auto& ix : enc.indexes) {
    const auto cat_col = static_cast<std::size_t>(
        std::find(raw.cat_names.begin(), raw.cat_names.end(), ix.column) -
        raw.cat_names.begin());
    std::vector<std::int64_t> col(static_cast<std::size_t>(n), 0);
    for (std::int64_t i = 0; i < n; ++i) {
      const auto it = ix.to_index.find(raw.cat_values[cat_col][static_cast<std::size_t>(i)]);
      if (it != ix.to_index.end()) col[static_cast<std::size_t>(i)] = it->second;
    }
    f.index_names.push_back(ix.column);
    f.index_cols.push_back(std::move(col));
    f.index_vocab.push_back(static_cast<std::int64_t>(ix.to_index.size()) + 1);
  }

  f.labels = raw.labels;
  f.fraud_types = raw.fraud_types;
  f.cardholder_ids = raw.cardholder_ids;
  f.times = raw.times;
  f.fold.assign(static_cast<std::size_t>(n), -1);
  return f;
}

}  // namespace fraudlab::preprocess
