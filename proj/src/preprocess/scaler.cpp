#include "fraudlab/preprocess/scaler.hpp"

#include "fraudlab/common.hpp"

namespace fraudlab::preprocess {

ScalerStats minmax_fit(const numerics::Tensor& X,
                       const std::vector<std::int64_t>& fit_rows) {
  if (fit_rows.empty()) throw data_error("minmax_fit: empty fit split");
  const std::int64_t d = X.dim(1);
  ScalerStats s;
  s.min.assign(static_cast<std::size_t>(d), 0.0);
  s.max.assign(static_cast<std::size_t>(d), 0.0);
  for (std::int64_t j = 0; j < d; ++j) {
    double lo = X.at(fit_rows[0], j), hi = lo;
    for (std::int64_t r : fit_rows) {
      const double v = X.at(r, j);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    s.min[static_cast<std::size_t>(j)] = lo;
    s.max[static_cast<std::size_t>(j)] = hi;
  }
  return s;
}

void minmax_apply_row(const ScalerStats& stats, double* row, std::int64_t width) {
  for (std::int64_t j = 0; j < width; ++j) {
    const double lo = stats.min[static_cast<std::size_t>(j)];
    const double hi = stats.max[static_cast<std::size_t>(j)];
    row[j] = hi > lo ? (row[j] - lo) / (hi - lo) : 0.0;
  }
}

void minmax_apply(const ScalerStats& stats, numerics::Tensor& X) {
  const std::int64_t d = X.dim(1);
  if (static_cast<std::size_t>(d) != stats.min.size())
    throw data_error("minmax_apply: width mismatch");
  for (std::int64_t i = 0; i < X.dim(0); ++i)
    minmax_apply_row(stats, X.data() + i * d, d);
}

}  // namespace fraudlab::preprocess
