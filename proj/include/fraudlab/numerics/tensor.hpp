#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "fraudlab/common.hpp"

namespace fraudlab::numerics {

// Dense row-major tensor of 64-bit floats. Rank is arbitrary but the
// training code only ever builds rank 1..3.
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(std::vector<std::int64_t> shape)
      : shape_(std::move(shape)), data_(checked_numel(shape_), 0.0) {}

  Tensor(std::vector<std::int64_t> shape, std::vector<double> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    if (checked_numel(shape_) != static_cast<std::int64_t>(data_.size()))
      throw data_error("tensor: shape does not match data length");
  }

  static Tensor zeros(std::vector<std::int64_t> shape) {
    return Tensor(std::move(shape));
  }

  static Tensor full(std::vector<std::int64_t> shape, double v) {
    Tensor t(std::move(shape));
    std::fill(t.data_.begin(), t.data_.end(), v);
    return t;
  }

  static Tensor scalar(double v) { return Tensor({1}, {v}); }

  const std::vector<std::int64_t>& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  std::int64_t dim(int i) const { return shape_[static_cast<std::size_t>(i)]; }
  std::int64_t numel() const { return static_cast<std::int64_t>(data_.size()); }
  bool empty() const { return data_.empty(); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::vector<double>& vec() { return data_; }
  const std::vector<double>& vec() const { return data_; }

  double& operator[](std::int64_t i) { return data_[static_cast<std::size_t>(i)]; }
  double operator[](std::int64_t i) const { return data_[static_cast<std::size_t>(i)]; }

  // 2-D accessors
  std::int64_t rows() const { return shape_.size() == 2 ? shape_[0] : 0; }
  std::int64_t cols() const { return shape_.size() == 2 ? shape_[1] : 0; }
  double& at(std::int64_t r, std::int64_t c) {
    return data_[static_cast<std::size_t>(r * shape_[1] + c)];
  }
  double at(std::int64_t r, std::int64_t c) const {
    return data_[static_cast<std::size_t>(r * shape_[1] + c)];
  }

  std::int64_t last_dim() const {
    return shape_.empty() ? 0 : shape_.back();
  }

  bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

  bool all_finite() const {
    for (double v : data_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  Tensor reshaped(std::vector<std::int64_t> new_shape) const {
    if (checked_numel(new_shape) != numel())
      throw data_error("tensor: reshape changes element count");
    Tensor t;
    t.shape_ = std::move(new_shape);
    t.data_ = data_;
    return t;
  }

  std::string shape_str() const {
    std::string s = "[";
    for (std::size_t i = 0; i < shape_.size(); ++i) {
      if (i) s += ",";
      s += std::to_string(shape_[i]);
    }
    return s + "]";
  }

 private:
  static std::int64_t checked_numel(const std::vector<std::int64_t>& shape) {
    std::int64_t n = 1;
    for (std::int64_t d : shape) {
      if (d < 0) throw data_error("tensor: negative dimension");
      n *= d;
    }
    return n;
  }

  std::vector<std::int64_t> shape_;
  std::vector<double> data_;
};

// ---- raw matmul kernels (row-major) ------------------------------------
// C(m,n) += / = A(m,k) * B(k,n); i-k-j order keeps the inner loop contiguous.

inline void gemm_nn(const double* a, const double* b, double* c,
                    std::int64_t m, std::int64_t k, std::int64_t n,
                    bool accumulate) {
  if (!accumulate) std::fill(c, c + m * n, 0.0);
  for (std::int64_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    double* crow = c + i * n;
    for (std::int64_t p = 0; p < k; ++p) {
      const double av = arow[p];
      if (av == 0.0) continue;
      const double* brow = b + p * n;
      for (std::int64_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

// C(m,n) = A(m,k) * B(n,k)^T
inline void gemm_nt(const double* a, const double* b, double* c,
                    std::int64_t m, std::int64_t k, std::int64_t n,
                    bool accumulate) {
  for (std::int64_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    double* crow = c + i * n;
    for (std::int64_t j = 0; j < n; ++j) {
      const double* brow = b + j * k;
      double s = 0.0;
      for (std::int64_t p = 0; p < k; ++p) s += arow[p] * brow[p];
      if (accumulate)
        crow[j] += s;
      else
        crow[j] = s;
    }
  }
}

// C(k,n) = A(m,k)^T * B(m,n)
inline void gemm_tn(const double* a, const double* b, double* c,
                    std::int64_t m, std::int64_t k, std::int64_t n,
                    bool accumulate) {
  if (!accumulate) std::fill(c, c + k * n, 0.0);
  for (std::int64_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    const double* brow = b + i * n;
    for (std::int64_t p = 0; p < k; ++p) {
      const double av = arow[p];
      if (av == 0.0) continue;
      double* crow = c + p * n;
      for (std::int64_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

}  // namespace fraudlab::numerics
