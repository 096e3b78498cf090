#pragma once

#include <cstdint>

#include "fraudlab/numerics/tensor.hpp"

namespace fraudlab::preprocess {

// Synthetic minority oversampling: each output row is x + u * (x_nn - x)
// with u ~ U(0,1) and x_nn one of x's k nearest minority neighbors under
// Euclidean distance. Operates on a continuous encoded space; the caller
// passes only interpolable columns. base_rows, when given, receives the
// index of the base sample x for every synthetic row so non-interpolable
// columns (identifier indices) can be inherited from it.
numerics::Tensor smote_oversample(const numerics::Tensor& minority_rows, int k,
                                  std::int64_t target_count, std::uint64_t seed,
                                  std::vector<std::int64_t>* base_rows = nullptr);

}  // namespace fraudlab::preprocess
