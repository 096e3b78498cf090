#pragma once

#include <cstdint>
#include <vector>

#include "fraudlab/datagen/schema.hpp"

namespace fraudlab::datagen {

// Typology shares in enum order {StolenCard, IdentityFraud,
// OnlinePaymentFraud, Other}.
struct TypologyMix {
  double stolen_card = 0.40;
  double identity_fraud = 0.30;
  double online_payment_fraud = 0.20;
  double other = 0.10;

  double sum() const {
    return stolen_card + identity_fraud + online_payment_fraud + other;
  }
};

std::vector<AccountProfile> generate_accounts(std::int64_t n_accounts,
                                              std::uint64_t seed);

// Time-ordered legitimate stream. Per-account arrivals are exponential with
// the account's activity rate; travel-prone and burst-prone accounts get one
// benign episode each. If more than target_count records are produced the
// earliest target_count are kept; 0 disables the cap.
std::vector<TransactionRecord> simulate_transactions(
    const std::vector<AccountProfile>& accounts, std::int64_t horizon_days,
    std::int64_t target_count, std::uint64_t seed);

// Adds labeled fraud episodes so prevalence lands on fraud_rate and the
// typology counts split per mix (largest-remainder rounding). Card-level
// context (median location, amount stats, pools) is derived from the stream
// itself. fraud_rate 0 returns the input unchanged.
std::vector<TransactionRecord> inject_fraud(
    const std::vector<TransactionRecord>& stream, double fraud_rate,
    const TypologyMix& mix, std::uint64_t seed);

// Fills every derived column from trailing same-card windows:
//   avg_transaction_amount   mean of trailing 5 amounts (incl. current)
//   avg_transaction_interval mean of trailing 5 inter-transaction gaps
//   transaction_frequency    same-card count in (t-24h, t]
//   geolocation_deviation    haversine km to the median of prior locations
//   spending_behavior_score  min(1, |amount - prior mean| / (4 * prior sd))
//   merchant_entropy         Shannon entropy of trailing-20 category counts
// Throws "stream not time-ordered" if any card's times decrease.
void compute_behavioral_features(std::vector<TransactionRecord>& stream);

struct GeneratorConfig {
  std::int64_t corpus_size = 50000;  // total rows, fraud included
  std::int64_t n_accounts = 2000;
  std::int64_t horizon_days = 30;
  double fraud_rate = 0.015;
  TypologyMix mix;
  int iforest_trees = 100;
  std::int64_t iforest_subsample = 256;
  std::uint64_t seed = 42;
};

// Full generation pipeline: accounts -> legit stream -> fraud injection ->
// behavioral features -> isolation-forest anomaly scores. Pure function of
// the config (seed included).
std::vector<TransactionRecord> generate_corpus(const GeneratorConfig& config);

}  // namespace fraudlab::datagen
