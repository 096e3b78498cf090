#pragma once

#include <cstdint>
#include <vector>

#include "fraudlab/numerics/tensor.hpp"

namespace fraudlab::preprocess {

// Per-column min/max captured on the fit split. Applying maps fit-split
// values into [0,1]; out-of-range apply values are NOT clamped, so a test
// value beyond the fit range maps outside [0,1] by design. Constant columns
// map to 0.
struct ScalerStats {
  std::vector<double> min;
  std::vector<double> max;
};

ScalerStats minmax_fit(const numerics::Tensor& X,
                       const std::vector<std::int64_t>& fit_rows);
void minmax_apply(const ScalerStats& stats, numerics::Tensor& X);
void minmax_apply_row(const ScalerStats& stats, double* row, std::int64_t width);

}  // namespace fraudlab::preprocess
