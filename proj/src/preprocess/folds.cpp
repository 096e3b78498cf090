#include "fraudlab/preprocess/folds.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "fraudlab/common.hpp"
#include "fraudlab/rng.hpp"

namespace fraudlab::preprocess {

std::pair<double, double> class_weights(const std::vector<int>& labels) {
  std::int64_t pos = 0;
  for (int y : labels) pos += y ? 1 : 0;
  const auto n = static_cast<std::int64_t>(labels.size());
  const std::int64_t neg = n - pos;
  if (pos == 0 || neg == 0) throw data_error("class_weights: single-class input");
  return {static_cast<double>(n) / (2.0 * static_cast<double>(pos)),
          static_cast<double>(n) / (2.0 * static_cast<double>(neg))};
}

std::vector<int> stratified_kfold(const std::vector<int>& labels,
                                  const std::vector<std::int64_t>& groups,
                                  int k, std::uint64_t seed) {
  if (k < 2) throw data_error("stratified_kfold: k must be >= 2");
  if (labels.size() != groups.size())
    throw data_error("stratified_kfold: labels/groups length mismatch");

  struct Group {
    std::int64_t key;
    std::vector<std::int64_t> rows;
    std::int64_t pos = 0;
  };
  std::map<std::int64_t, Group> by_key;
  std::int64_t total_pos = 0, total_neg = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    Group& g = by_key[groups[i]];
    g.key = groups[i];
    g.rows.push_back(static_cast<std::int64_t>(i));
    if (labels[i]) {
      g.pos++;
      total_pos++;
    } else {
      total_neg++;
    }
  }
  if (total_pos < k || total_neg < k)
    throw data_error("stratified_kfold: class count below k");

  std::vector<Group> order;
  order.reserve(by_key.size());
  for (auto& [key, g] : by_key) order.push_back(std::move(g));
  Rng rng(seed);
  rng.shuffle(order);
  // positive-carrying groups first (largest first), then by size
  std::stable_sort(order.begin(), order.end(), [](const Group& a, const Group& b) {
    if (a.pos != b.pos) return a.pos > b.pos;
    return a.rows.size() > b.rows.size();
  });

  std::vector<std::int64_t> fold_pos(static_cast<std::size_t>(k), 0);
  std::vector<std::int64_t> fold_rows(static_cast<std::size_t>(k), 0);
  std::vector<int> assignment(labels.size(), -1);
  for (const Group& g : order) {
    int best = 0;
    for (int f = 1; f < k; ++f) {
      const auto bf = static_cast<std::size_t>(best);
      const auto ff = static_cast<std::size_t>(f);
      if (fold_pos[ff] < fold_pos[bf] ||
          (fold_pos[ff] == fold_pos[bf] && fold_rows[ff] < fold_rows[bf]))
        best = f;
    }
    const auto bf = static_cast<std::size_t>(best);
    fold_pos[bf] += g.pos;
    fold_rows[bf] += static_cast<std::int64_t>(g.rows.size());
    for (std::int64_t r : g.rows) assignment[static_cast<std::size_t>(r)] = best;
  }
  return assignment;
}

std::vector<int> stratified_kfold(const std::vector<int>& labels, int k,
                                  std::uint64_t seed) {
  std::vector<std::int64_t> singleton(labels.size());
  std::iota(singleton.begin(), singleton.end(), 0);
  return stratified_kfold(labels, singleton, k, seed);
}

}  // namespace fraudlab::preprocess
