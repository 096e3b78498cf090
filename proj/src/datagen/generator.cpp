#include "fraudlab/datagen/generator.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <unordered_map>

#include "fraudlab/datagen/isolation_forest.hpp"
#include "fraudlab/rng.hpp"

namespace fraudlab::datagen {

namespace {

constexpr double kEarthRadiusKm = 6371.0;
constexpr double kDegPerKmLat = 1.0 / 111.32;
constexpr double kMinAmount = 1.0;
constexpr double kMaxAmount = 10000.0;

// Log-normal decomposition targeting a pooled amount mean of ~150.75 and
// sd of ~325.45: total log-variance 1.7337 split into an across-account
// component (0.35) and a within-account component (1.3837).
constexpr double kLogAmountMu = 4.1489;
constexpr double kAcrossAccountSd = 0.59161;   // sqrt(0.35)
constexpr double kWithinAccountSigma = 1.17631;  // sqrt(1.3837)

// Activity rate ~ lognormal with mean 3.2/day so the trailing-24h count
// (1 + Poisson) averages ~4.2.
constexpr double kRateLogMu = 1.0352;
constexpr double kRateLogSigma = 0.5066;

std::int64_t fraud_ip_base() { return 1LL << 30; }

double clamp_amount(double a) {
  return std::min(kMaxAmount, std::max(kMinAmount, a));
}

void offset_km(double lat, double lon, double east_km, double north_km,
               double* out_lat, double* out_lon) {
  *out_lat = lat + north_km * kDegPerKmLat;
  double coslat = std::cos(lat * M_PI / 180.0);
  if (std::abs(coslat) < 0.1) coslat = coslat < 0 ? -0.1 : 0.1;
  *out_lon = lon + east_km * kDegPerKmLat / coslat;
}

DeviceType online_device(const AccountProfile& acct, Rng& rng) {
  std::vector<DeviceType> ok;
  for (DeviceType d : acct.device_pool)
    if (d == DeviceType::Mobile || d == DeviceType::Desktop) ok.push_back(d);
  if (ok.empty()) return DeviceType::Mobile;
  return ok[rng.below(ok.size())];
}

}  // namespace

double haversine_km(double lat1, double lon1, double lat2, double lon2) {
  const double p1 = lat1 * M_PI / 180.0, p2 = lat2 * M_PI / 180.0;
  const double dp = p2 - p1, dl = (lon2 - lon1) * M_PI / 180.0;
  const double a = std::sin(dp / 2) * std::sin(dp / 2) +
                   std::cos(p1) * std::cos(p2) * std::sin(dl / 2) * std::sin(dl / 2);
  return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(a)));
}

std::vector<AccountProfile> generate_accounts(std::int64_t n_accounts,
                                              std::uint64_t seed) {
  if (n_accounts < 1) throw data_error("generate_accounts: n_accounts must be >= 1");
  const auto& cats = merchant_categories();
  // global popularity prior over categories
  const std::vector<double> popularity = {0.20, 0.14, 0.12, 0.05, 0.07, 0.09,
                                          0.08, 0.06, 0.07, 0.08, 0.01, 0.03};

  std::vector<AccountProfile> out;
  out.reserve(static_cast<std::size_t>(n_accounts));
  for (std::int64_t i = 0; i < n_accounts; ++i) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    AccountProfile a;
    a.cardholder_id = 1000 + i;
    a.home_lat = rng.uniform(25.0, 60.0);
    a.home_lon = rng.uniform(-120.0, 30.0);

    a.spend_log_mu = kLogAmountMu + kAcrossAccountSd * rng.normal();
    a.spend_log_sigma = kWithinAccountSigma;
    a.spend_mean = std::exp(a.spend_log_mu + 0.5 * a.spend_log_sigma * a.spend_log_sigma);
    a.spend_sd = a.spend_mean *
                 std::sqrt(std::exp(a.spend_log_sigma * a.spend_log_sigma) - 1.0);

    a.activity_rate =
        std::min(20.0, std::max(0.25, rng.lognormal(kRateLogMu, kRateLogSigma)));

    a.merchant_preference.resize(cats.size());
    double sum = 0.0;
    for (std::size_t c = 0; c < cats.size(); ++c) {
      a.merchant_preference[c] = popularity[c] * std::exp(0.8 * rng.normal());
      sum += a.merchant_preference[c];
    }
    for (double& p : a.merchant_preference) p /= sum;

    // device pool always contains a card-present and an online-capable device
    a.device_pool.push_back(rng.uniform() < 0.7 ? DeviceType::Mobile
                                                : DeviceType::Desktop);
    a.device_pool.push_back(DeviceType::Pos);
    if (rng.uniform() < 0.35) a.device_pool.push_back(DeviceType::Tablet);
    if (rng.uniform() < 0.40) a.device_pool.push_back(DeviceType::Atm);

    const int n_ips = 1 + static_cast<int>(rng.below(4));
    for (int k = 0; k < n_ips; ++k) a.ip_pool.push_back(i * 8 + k + 1);

    a.start_balance = rng.lognormal(std::log(4000.0), 0.6);
    a.travel_prone = rng.uniform() < 0.05;
    a.burst_prone = rng.uniform() < 0.02;

    validate(a);
    out.push_back(std::move(a));
  }
  return out;
}

namespace {

struct Episode {
  double start_h = -1.0;
  double end_h = -1.0;
  bool active(double t) const { return t >= start_h && t < end_h; }
};

}  // namespace

std::vector<TransactionRecord> simulate_transactions(
    const std::vector<AccountProfile>& accounts, std::int64_t horizon_days,
    std::int64_t target_count, std::uint64_t seed) {
  if (horizon_days < 1) throw data_error("simulate: horizon_days must be >= 1");
  const double horizon_h = static_cast<double>(horizon_days) * 24.0;

  std::vector<TransactionRecord> all;
  for (const AccountProfile& acct : accounts) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(acct.cardholder_id)));

    Episode travel, burst;
    double travel_lat = acct.home_lat, travel_lon = acct.home_lon;
    if (acct.travel_prone) {
      travel.start_h = rng.uniform(0.0, horizon_h * 0.8);
      travel.end_h = travel.start_h + rng.uniform(3.0, 10.0) * 24.0;
      const double dist = rng.uniform(500.0, 8000.0);
      const double bearing = rng.uniform(0.0, 2.0 * M_PI);
      offset_km(acct.home_lat, acct.home_lon, dist * std::cos(bearing),
                dist * std::sin(bearing), &travel_lat, &travel_lon);
    }
    if (acct.burst_prone) {
      burst.start_h = rng.uniform(0.0, horizon_h * 0.9);
      burst.end_h = burst.start_h + rng.uniform(1.0, 2.0) * 24.0;
    }

    double balance = acct.start_balance;
    double t = 0.0;
    const double base_rate_h = acct.activity_rate / 24.0;
    for (;;) {
      const double rate_h = burst.active(t) ? base_rate_h * 8.0 : base_rate_h;
      t += rng.exponential(rate_h);
      if (t >= horizon_h) break;

      TransactionRecord r;
      r.cardholder_id = acct.cardholder_id;
      r.time_of_transaction = t;

      const double u = rng.uniform();
      r.transaction_type = u < 0.70   ? TransactionType::Purchase
                           : u < 0.85 ? TransactionType::Withdrawal
                                      : TransactionType::OnlinePayment;
      r.merchant_category = static_cast<int>(rng.pick(acct.merchant_preference));
      r.transaction_amount =
          clamp_amount(rng.lognormal(acct.spend_log_mu, acct.spend_log_sigma));

      const bool traveling = travel.active(t);
      const double clat = traveling ? travel_lat : acct.home_lat;
      const double clon = traveling ? travel_lon : acct.home_lon;
      offset_km(clat, clon, rng.normal(0.0, 15.0), rng.normal(0.0, 15.0),
                &r.geo_lat, &r.geo_lon);

      switch (r.transaction_type) {
        case TransactionType::Withdrawal:
          r.device_information = DeviceType::Atm;
          break;
        case TransactionType::OnlinePayment:
          r.device_information = online_device(acct, rng);
          break;
        case TransactionType::Purchase:
          r.device_information = acct.device_pool[rng.below(acct.device_pool.size())];
          break;
      }
      r.ip_address = acct.ip_pool[rng.below(acct.ip_pool.size())];

      balance -= r.transaction_amount;
      if (balance < 50.0) balance += rng.lognormal(std::log(3000.0), 0.5);
      r.account_balance = balance;

      all.push_back(r);
    }
  }

  std::stable_sort(all.begin(), all.end(),
                   [](const TransactionRecord& a, const TransactionRecord& b) {
                     if (a.time_of_transaction != b.time_of_transaction)
                       return a.time_of_transaction < b.time_of_transaction;
                     return a.cardholder_id < b.cardholder_id;
                   });
  if (target_count > 0 && static_cast<std::int64_t>(all.size()) > target_count)
    all.resize(static_cast<std::size_t>(target_count));
  return all;
}

namespace {

// Per-card context reconstructed from the stream; fraud generators use it to
// produce in-pattern or out-of-pattern values.
struct CardContext {
  std::int64_t card = 0;
  double median_lat = 0.0;
  double median_lon = 0.0;
  double mean_amount = 0.0;
  double sd_amount = 0.0;
  double first_t = 0.0;
  double last_t = 0.0;
  double last_balance = 0.0;
  std::vector<DeviceType> devices;
  std::vector<std::int64_t> ips;
  std::vector<int> merchant_counts;
  std::int64_t n = 0;
};

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid) - 1,
                   v.end());
  return 0.5 * (hi + v[mid - 1]);
}

std::vector<CardContext> build_contexts(const std::vector<TransactionRecord>& stream) {
  std::map<std::int64_t, std::vector<const TransactionRecord*>> by_card;
  for (const auto& r : stream) by_card[r.cardholder_id].push_back(&r);

  std::vector<CardContext> out;
  for (auto& [card, rows] : by_card) {
    CardContext c;
    c.card = card;
    c.n = static_cast<std::int64_t>(rows.size());
    std::vector<double> lats, lons;
    double sum = 0.0, sum2 = 0.0;
    c.merchant_counts.assign(merchant_categories().size(), 0);
    for (const auto* r : rows) {
      lats.push_back(r->geo_lat);
      lons.push_back(r->geo_lon);
      sum += r->transaction_amount;
      sum2 += r->transaction_amount * r->transaction_amount;
      if (std::find(c.devices.begin(), c.devices.end(), r->device_information) ==
          c.devices.end())
        c.devices.push_back(r->device_information);
      if (std::find(c.ips.begin(), c.ips.end(), r->ip_address) == c.ips.end())
        c.ips.push_back(r->ip_address);
      c.merchant_counts[static_cast<std::size_t>(r->merchant_category)]++;
    }
    c.median_lat = median_of(lats);
    c.median_lon = median_of(lons);
    const double n = static_cast<double>(rows.size());
    c.mean_amount = sum / n;
    c.sd_amount = n > 1 ? std::sqrt(std::max(0.0, (sum2 - sum * sum / n) / (n - 1)))
                        : 0.0;
    c.first_t = rows.front()->time_of_transaction;
    c.last_t = rows.back()->time_of_transaction;
    c.last_balance = rows.back()->account_balance;
    out.push_back(std::move(c));
  }
  return out;
}

int rare_merchant(const CardContext& c, Rng& rng) {
  int best = -1, best_count = std::numeric_limits<int>::max();
  const int offset = static_cast<int>(rng.below(c.merchant_counts.size()));
  for (std::size_t k = 0; k < c.merchant_counts.size(); ++k) {
    const int i = (offset + static_cast<int>(k)) % static_cast<int>(c.merchant_counts.size());
    if (c.merchant_counts[static_cast<std::size_t>(i)] < best_count) {
      best_count = c.merchant_counts[static_cast<std::size_t>(i)];
      best = i;
    }
  }
  return best;
}

int common_merchant(const CardContext& c, Rng& rng) {
  std::vector<double> w(c.merchant_counts.size());
  for (std::size_t i = 0; i < w.size(); ++i)
    w[i] = static_cast<double>(c.merchant_counts[i]) + 0.01;
  return static_cast<int>(rng.pick(w));
}

// largest-remainder split of `total` into shares
std::vector<std::int64_t> apportion(std::int64_t total,
                                    const std::vector<double>& shares) {
  std::vector<std::int64_t> counts(shares.size());
  std::vector<std::pair<double, std::size_t>> rema;
  std::int64_t assigned = 0;
  for (std::size_t i = 0; i < shares.size(); ++i) {
    const double exact = shares[i] * static_cast<double>(total);
    counts[i] = static_cast<std::int64_t>(std::floor(exact));
    assigned += counts[i];
    rema.push_back({exact - std::floor(exact), i});
  }
  std::sort(rema.begin(), rema.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  for (std::int64_t k = 0; k < total - assigned; ++k)
    counts[rema[static_cast<std::size_t>(k)].second]++;
  return counts;
}

}  // namespace

std::vector<TransactionRecord> inject_fraud(
    const std::vector<TransactionRecord>& stream, double fraud_rate,
    const TypologyMix& mix, std::uint64_t seed) {
  if (std::abs(mix.sum() - 1.0) > 1e-9)
    throw data_error("inject_fraud: typology mix must sum to 1");
  if (fraud_rate == 0.0) return stream;
  if (fraud_rate < 0.0 || fraud_rate >= 0.5)
    throw data_error("inject_fraud: fraud_rate must lie in (0, 0.5)");
  if (stream.empty()) return stream;

  const auto n_legit = static_cast<double>(stream.size());
  const auto total_fraud = static_cast<std::int64_t>(
      std::llround(fraud_rate * n_legit / (1.0 - fraud_rate)));
  const std::vector<std::int64_t> quota =
      apportion(total_fraud, {mix.stolen_card, mix.identity_fraud,
                              mix.online_payment_fraud, mix.other});

  std::vector<CardContext> contexts = build_contexts(stream);
  Rng rng(derive_seed(seed, 0xF4A0DULL));
  std::int64_t next_fraud_ip = fraud_ip_base();
  std::int64_t next_fraud_device_seq = 0;
  const double t_lo = stream.front().time_of_transaction;
  const double t_hi = stream.back().time_of_transaction;

  std::vector<std::size_t> rich_cards;  // cards with enough history
  for (std::size_t i = 0; i < contexts.size(); ++i)
    if (contexts[i].n >= 3) rich_cards.push_back(i);

  auto pick_card = [&](std::int64_t min_rows) -> const CardContext& {
    if (min_rows >= 3 && !rich_cards.empty())
      return contexts[rich_cards[rng.below(rich_cards.size())]];
    return contexts[rng.below(contexts.size())];
  };

  std::vector<TransactionRecord> frauds;
  frauds.reserve(static_cast<std::size_t>(total_fraud));

  auto base_record = [&](const CardContext& c, double t) {
    TransactionRecord r;
    r.cardholder_id = c.card;
    r.time_of_transaction = t;
    r.fraud = true;
    r.account_balance = c.last_balance;  // refined after amounts are known
    return r;
  };

  // StolenCard: burst of out-of-pattern merchants/locations on an existing
  // card. ~15% of episodes are near-boundary: every feature stays inside the
  // card's own ranges and only the rapid cadence differs.
  std::int64_t remaining = quota[0];
  while (remaining > 0) {
    const CardContext& c = pick_card(3);
    const bool subtle = rng.uniform() < 0.15;
    const auto burst_len =
        std::min<std::int64_t>(remaining, 3 + static_cast<std::int64_t>(rng.below(6)));
    double t = rng.uniform(t_lo, std::max(t_lo + 1.0, t_hi - 6.0));
    double flat = c.median_lat, flon = c.median_lon;
    if (!subtle) {
      const double dist = rng.uniform(300.0, 5000.0);
      const double bearing = rng.uniform(0.0, 2.0 * M_PI);
      offset_km(c.median_lat, c.median_lon, dist * std::cos(bearing),
                dist * std::sin(bearing), &flat, &flon);
    }
    DeviceType dev = subtle ? c.devices[rng.below(c.devices.size())]
                            : static_cast<DeviceType>(next_fraud_device_seq++ % 5);
    const std::int64_t ip = subtle ? c.ips[rng.below(c.ips.size())] : next_fraud_ip++;
    for (std::int64_t k = 0; k < burst_len; ++k) {
      TransactionRecord r = base_record(c, t);
      r.fraud_type = FraudType::StolenCard;
      r.transaction_type =
          rng.uniform() < 0.6 ? TransactionType::Purchase : TransactionType::OnlinePayment;
      r.merchant_category = subtle ? common_merchant(c, rng) : rare_merchant(c, rng);
      const double mult = subtle ? rng.uniform(0.6, 1.4) : rng.uniform(1.5, 4.0);
      r.transaction_amount = clamp_amount(c.mean_amount * mult);
      offset_km(flat, flon, rng.normal(0.0, 5.0), rng.normal(0.0, 5.0), &r.geo_lat,
                &r.geo_lon);
      r.device_information = dev;
      r.ip_address = ip;
      frauds.push_back(r);
      t += subtle ? rng.uniform(1.0, 10.0) / 60.0 : rng.uniform(3.0, 60.0) / 60.0;
    }
    remaining -= burst_len;
  }

  // IdentityFraud: brand-new device and IP with plausible amounts near the
  // cardholder's home; the per-feature values sit inside legitimate ranges.
  remaining = quota[1];
  while (remaining > 0) {
    const CardContext& c = pick_card(2);
    const auto len = std::min<std::int64_t>(remaining,
                                            1 + static_cast<std::int64_t>(rng.below(3)));
    double t = rng.uniform(t_lo, t_hi);
    DeviceType dev = static_cast<DeviceType>(next_fraud_device_seq++ % 5);
    const std::int64_t ip = next_fraud_ip++;
    for (std::int64_t k = 0; k < len; ++k) {
      TransactionRecord r = base_record(c, t);
      r.fraud_type = FraudType::IdentityFraud;
      r.transaction_type = rng.uniform() < 0.5 ? TransactionType::OnlinePayment
                                               : TransactionType::Purchase;
      r.merchant_category = common_merchant(c, rng);
      r.transaction_amount = clamp_amount(
          std::max(kMinAmount, c.mean_amount + rng.normal(0.0, 0.5) *
                                                   std::max(1.0, c.sd_amount)));
      offset_km(c.median_lat, c.median_lon, rng.normal(0.0, 25.0),
                rng.normal(0.0, 25.0), &r.geo_lat, &r.geo_lon);
      r.device_information = dev;
      r.ip_address = ip;
      frauds.push_back(r);
      t += rng.uniform(0.5, 12.0);
    }
    remaining -= len;
  }

  // OnlinePaymentFraud: online transactions with escalating amounts.
  remaining = quota[2];
  while (remaining > 0) {
    const CardContext& c = pick_card(2);
    const auto len = std::min<std::int64_t>(remaining,
                                            2 + static_cast<std::int64_t>(rng.below(4)));
    double t = rng.uniform(t_lo, std::max(t_lo + 1.0, t_hi - 12.0));
    const std::int64_t ip = next_fraud_ip++;
    double amount = std::max(kMinAmount, c.mean_amount * rng.uniform(0.8, 1.2));
    for (std::int64_t k = 0; k < len; ++k) {
      TransactionRecord r = base_record(c, t);
      r.fraud_type = FraudType::OnlinePaymentFraud;
      r.transaction_type = TransactionType::OnlinePayment;
      r.merchant_category = merchant_category_from("OnlineServices");
      r.transaction_amount = clamp_amount(amount);
      offset_km(c.median_lat, c.median_lon, rng.normal(0.0, 20.0),
                rng.normal(0.0, 20.0), &r.geo_lat, &r.geo_lon);
      r.device_information = rng.uniform() < 0.6 ? DeviceType::Mobile
                                                 : DeviceType::Desktop;
      r.ip_address = ip;
      frauds.push_back(r);
      amount *= rng.uniform(1.3, 1.8);
      t += rng.uniform(0.2, 4.0);
    }
    remaining -= len;
  }

  // Other: one structural outlier per row, either an extreme amount or a
  // far geolocation jump. These form the anomalous-typology ground truth.
  remaining = quota[3];
  while (remaining > 0) {
    const CardContext& c = pick_card(2);
    TransactionRecord r = base_record(c, rng.uniform(t_lo, t_hi));
    r.fraud_type = FraudType::Other;
    r.transaction_type = rng.uniform() < 0.5 ? TransactionType::Purchase
                                             : TransactionType::OnlinePayment;
    r.merchant_category = common_merchant(c, rng);
    if (rng.uniform() < 0.5) {
      const double sd = std::max(c.sd_amount, 0.25 * c.mean_amount);
      r.transaction_amount =
          clamp_amount(c.mean_amount + rng.uniform(10.0, 30.0) * sd);
      offset_km(c.median_lat, c.median_lon, rng.normal(0.0, 15.0),
                rng.normal(0.0, 15.0), &r.geo_lat, &r.geo_lon);
    } else {
      r.transaction_amount =
          clamp_amount(c.mean_amount * rng.uniform(0.7, 1.3));
      const double dist = rng.uniform(6000.0, 15000.0);
      const double bearing = rng.uniform(0.0, 2.0 * M_PI);
      offset_km(c.median_lat, c.median_lon, dist * std::cos(bearing),
                dist * std::sin(bearing), &r.geo_lat, &r.geo_lon);
    }
    r.device_information = c.devices[rng.below(c.devices.size())];
    r.ip_address = c.ips[rng.below(c.ips.size())];
    frauds.push_back(r);
    --remaining;
  }

  // balances: simple overdraft model, no top-ups on fraudulent activity
  for (auto& r : frauds) r.account_balance -= r.transaction_amount;

  std::vector<TransactionRecord> merged = stream;
  merged.insert(merged.end(), frauds.begin(), frauds.end());
  std::stable_sort(merged.begin(), merged.end(),
                   [](const TransactionRecord& a, const TransactionRecord& b) {
                     if (a.time_of_transaction != b.time_of_transaction)
                       return a.time_of_transaction < b.time_of_transaction;
                     return a.cardholder_id < b.cardholder_id;
                   });
  return merged;
}

void compute_behavioral_features(std::vector<TransactionRecord>& stream) {
  struct CardState {
    std::deque<double> amounts;     // trailing 5, incl. current
    std::deque<double> gaps;        // trailing 5
    std::deque<double> times_24h;   // same-card times within 24 h
    std::deque<int> categories;     // trailing 20, incl. current
    std::vector<double> lats, lons;  // prior locations
    double last_t = 0.0;
    // Welford accumulators over prior amounts
    std::int64_t n_prior = 0;
    double mean = 0.0;
    double m2 = 0.0;
    bool seen = false;
  };

  std::unordered_map<std::int64_t, CardState> states;
  for (auto& r : stream) {
    CardState& s = states[r.cardholder_id];
    if (s.seen && r.time_of_transaction < s.last_t)
      throw data_error("stream not time-ordered");

    // trailing 24 h frequency, (t-24, t]
    s.times_24h.push_back(r.time_of_transaction);
    while (!s.times_24h.empty() &&
           s.times_24h.front() <= r.time_of_transaction - 24.0)
      s.times_24h.pop_front();
    r.transaction_frequency = static_cast<int>(s.times_24h.size());

    s.amounts.push_back(r.transaction_amount);
    if (s.amounts.size() > 5) s.amounts.pop_front();
    double sum = 0.0;
    for (double a : s.amounts) sum += a;
    r.avg_transaction_amount = sum / static_cast<double>(s.amounts.size());

    if (s.seen) {
      s.gaps.push_back(r.time_of_transaction - s.last_t);
      if (s.gaps.size() > 5) s.gaps.pop_front();
    }
    if (s.gaps.empty()) {
      r.avg_transaction_interval = 0.0;
    } else {
      double gsum = 0.0;
      for (double gp : s.gaps) gsum += gp;
      r.avg_transaction_interval = gsum / static_cast<double>(s.gaps.size());
    }

    if (s.lats.empty()) {
      r.geolocation_deviation = 0.0;
    } else {
      r.geolocation_deviation =
          haversine_km(r.geo_lat, r.geo_lon, median_of(s.lats), median_of(s.lons));
    }

    if (s.n_prior < 2) {
      r.spending_behavior_score = 0.0;
    } else {
      const double sd =
          std::sqrt(s.m2 / static_cast<double>(s.n_prior - 1));
      const double dev = std::abs(r.transaction_amount - s.mean);
      r.spending_behavior_score =
          sd > 1e-12 ? std::min(1.0, dev / (4.0 * sd)) : (dev > 1e-12 ? 1.0 : 0.0);
    }

    s.categories.push_back(r.merchant_category);
    if (s.categories.size() > 20) s.categories.pop_front();
    {
      std::vector<int> counts(merchant_categories().size(), 0);
      for (int c : s.categories) counts[static_cast<std::size_t>(c)]++;
      double h = 0.0;
      const double n = static_cast<double>(s.categories.size());
      for (int c : counts)
        if (c > 0) {
          const double p = static_cast<double>(c) / n;
          h -= p * std::log(p);
        }
      r.merchant_entropy = h;
    }

    // fold current row into the prior-state accumulators
    s.lats.push_back(r.geo_lat);
    s.lons.push_back(r.geo_lon);
    s.n_prior++;
    const double delta = r.transaction_amount - s.mean;
    s.mean += delta / static_cast<double>(s.n_prior);
    s.m2 += delta * (r.transaction_amount - s.mean);
    s.last_t = r.time_of_transaction;
    s.seen = true;
  }
}

std::vector<TransactionRecord> generate_corpus(const GeneratorConfig& config) {
  if (config.corpus_size < 1) throw data_error("generate: corpus_size must be >= 1");
  auto accounts = generate_accounts(config.n_accounts, config.seed);
  const auto legit_target = static_cast<std::int64_t>(
      std::llround(static_cast<double>(config.corpus_size) * (1.0 - config.fraud_rate)));
  auto stream = simulate_transactions(accounts, config.horizon_days,
                                      std::max<std::int64_t>(1, legit_target),
                                      derive_seed(config.seed, 1));
  stream = inject_fraud(stream, config.fraud_rate, config.mix,
                        derive_seed(config.seed, 2));
  compute_behavioral_features(stream);

  // anomaly scores from an isolation forest over the engineered features
  const std::int64_t n = static_cast<std::int64_t>(stream.size());
  numerics::Tensor features({n, 7});
  for (std::int64_t i = 0; i < n; ++i) {
    const TransactionRecord& r = stream[static_cast<std::size_t>(i)];
    features.at(i, 0) = r.transaction_amount;
    features.at(i, 1) = r.geolocation_deviation;
    features.at(i, 2) = static_cast<double>(r.transaction_frequency);
    features.at(i, 3) = r.avg_transaction_amount;
    features.at(i, 4) = r.avg_transaction_interval;
    features.at(i, 5) = r.spending_behavior_score;
    features.at(i, 6) = r.merchant_entropy;
  }
  const std::int64_t subsample = std::min<std::int64_t>(config.iforest_subsample, n);
  if (subsample >= 2) {
    auto forest = IsolationForestModel::fit(features, config.iforest_trees,
                                            subsample, derive_seed(config.seed, 3));
    for (std::int64_t i = 0; i < n; ++i)
      stream[static_cast<std::size_t>(i)].anomaly_score =
          forest.score(features.data() + i * 7);
  }
  return stream;
}

}  // namespace fraudlab::datagen
