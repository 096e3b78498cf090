#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fraudlab/common.hpp"

namespace fraudlab::datagen {

enum class TransactionType { Purchase, Withdrawal, OnlinePayment };
enum class DeviceType { Mobile, Desktop, Tablet, Pos, Atm };
enum class FraudType { None, StolenCard, IdentityFraud, OnlinePaymentFraud, Other };

// Merchant category universe; small enough for one-hot encoding downstream.
inline const std::vector<std::string>& merchant_categories() {
  static const std::vector<std::string> k = {
      "Groceries",  "Restaurants",   "Fuel",    "Travel",
      "Electronics", "Clothing",     "Entertainment", "Health",
      "Utilities",  "OnlineServices", "Jewelry", "Household"};
  return k;
}

std::string to_string(TransactionType t);
std::string to_string(DeviceType d);
std::string to_string(FraudType f);
TransactionType transaction_type_from(const std::string& s);
DeviceType device_type_from(const std::string& s);
FraudType fraud_type_from(const std::string& s);
int merchant_category_from(const std::string& s);

// Behavioral agent: one simulated cardholder.
struct AccountProfile {
  std::int64_t cardholder_id = 0;
  double home_lat = 0.0;
  double home_lon = 0.0;
  double spend_mean = 0.0;  // currency units
  double spend_sd = 0.0;
  double spend_log_mu = 0.0;    // log-normal parameters behind mean/sd
  double spend_log_sigma = 0.0;
  std::vector<double> merchant_preference;  // sums to 1 over categories
  double activity_rate = 0.0;               // expected transactions / day
  std::vector<DeviceType> device_pool;
  std::vector<std::int64_t> ip_pool;
  double start_balance = 0.0;
  // benign hard cases
  bool travel_prone = false;
  bool burst_prone = false;
};

// One transaction row: raw simulated fields plus engineered features.
struct TransactionRecord {
  double transaction_amount = 0.0;
  TransactionType transaction_type = TransactionType::Purchase;
  double time_of_transaction = 0.0;  // fractional hours since stream start
  int merchant_category = 0;
  double geo_lat = 0.0;
  double geo_lon = 0.0;
  std::int64_t cardholder_id = 0;
  int transaction_frequency = 0;  // same-card count in the trailing 24 h
  DeviceType device_information = DeviceType::Mobile;
  std::int64_t ip_address = 0;
  double account_balance = 0.0;
  double avg_transaction_amount = 0.0;    // trailing 5 same-card amounts
  double avg_transaction_interval = 0.0;  // trailing 5 same-card gaps, hours
  double geolocation_deviation = 0.0;     // km to running median location
  double anomaly_score = 0.0;             // isolation-forest output in (0,1)
  double spending_behavior_score = 0.0;
  bool fraud = false;
  FraudType fraud_type = FraudType::None;
  // internal feature, not part of the emitted schema
  double merchant_entropy = 0.0;
};

inline void validate(const AccountProfile& a) {
  if (a.spend_mean <= 0.0) throw data_error("account: spend_mean must be positive");
  if (a.spend_sd < 0.0) throw data_error("account: spend_sd must be nonnegative");
  if (a.activity_rate <= 0.0) throw data_error("account: activity_rate must be positive");
  double sum = 0.0;
  for (double p : a.merchant_preference) sum += p;
  if (std::abs(sum - 1.0) > 1e-9)
    throw data_error("account: merchant_preference must sum to 1");
}

// Great-circle distance in km on a 6371 km sphere.
double haversine_km(double lat1, double lon1, double lat2, double lon2);

}  // namespace fraudlab::datagen
