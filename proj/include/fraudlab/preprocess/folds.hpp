#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace fraudlab::preprocess {

// Balanced class weights: w_pos = n / (2 * n_pos), w_neg = n / (2 * n_neg).
// The identity w_pos * n_pos + w_neg * n_neg == n holds exactly.
std::pair<double, double> class_weights(const std::vector<int>& labels);

// Stratified k-fold assignment grouped by cardholder: one card never spans
// the train and test side of a fold. With singleton groups the per-fold
// positive counts are exact (within one sample of the global rate); with
// multi-row cards a greedy balancer gets as close as the grouping allows.
std::vector<int> stratified_kfold(const std::vector<int>& labels,
                                  const std::vector<std::int64_t>& groups,
                                  int k, std::uint64_t seed);

// Ungrouped variant: every row is its own group.
std::vector<int> stratified_kfold(const std::vector<int>& labels, int k,
                                  std::uint64_t seed);

}  // namespace fraudlab::preprocess
