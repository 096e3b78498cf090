#include "fraudlab/preprocess/smote.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "fraudlab/common.hpp"
#include "fraudlab/rng.hpp"

namespace fraudlab::preprocess {

numerics::Tensor smote_oversample(const numerics::Tensor& minority_rows, int k,
                                  std::int64_t target_count, std::uint64_t seed,
                                  std::vector<std::int64_t>* base_rows) {
  if (base_rows) base_rows->clear();
  if (minority_rows.rank() != 2) throw data_error("smote: rank-2 matrix expected");
  const std::int64_t m = minority_rows.dim(0);
  const std::int64_t d = minority_rows.dim(1);
  if (target_count == 0) return numerics::Tensor({0, d});
  if (k < 1) throw data_error("smote: k must be >= 1");
  if (m <= k) throw data_error("too few minority samples");

  // k nearest neighbors per row, brute force, deterministic ties by index
  std::vector<std::vector<std::int64_t>> knn(static_cast<std::size_t>(m));
  std::vector<std::pair<double, std::int64_t>> dist(static_cast<std::size_t>(m));
  for (std::int64_t i = 0; i < m; ++i) {
    const double* xi = minority_rows.data() + i * d;
    for (std::int64_t j = 0; j < m; ++j) {
      const double* xj = minority_rows.data() + j * d;
      double s = 0.0;
      for (std::int64_t c = 0; c < d; ++c) {
        const double diff = xi[c] - xj[c];
        s += diff * diff;
      }
      dist[static_cast<std::size_t>(j)] = {j == i ? std::numeric_limits<double>::infinity() : s, j};
    }
    std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
    auto& nn = knn[static_cast<std::size_t>(i)];
    for (int t = 0; t < k; ++t) nn.push_back(dist[static_cast<std::size_t>(t)].second);
  }

  Rng rng(seed);
  numerics::Tensor out({target_count, d});
  for (std::int64_t s = 0; s < target_count; ++s) {
    const std::int64_t base = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(m)));
    if (base_rows) base_rows->push_back(base);
    const auto& nn = knn[static_cast<std::size_t>(base)];
    const std::int64_t pick = nn[rng.below(nn.size())];
    const double u = rng.uniform();
    const double* xb = minority_rows.data() + base * d;
    const double* xn = minority_rows.data() + pick * d;
    double* row = out.data() + s * d;
    for (std::int64_t c = 0; c < d; ++c) row[c] = xb[c] + u * (xn[c] - xb[c]);
  }
  return out;
}

}  // namespace fraudlab::preprocess
