#pragma once

#include <cmath>
#include <vector>

#include "fraudlab/numerics/params.hpp"

namespace fraudlab::numerics {

// Adaptive moment estimation over a ParamSet, default betas 0.9 / 0.999.
class Adam {
 public:
  Adam(double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void step(ParamSet& params, const std::vector<Tensor>& grads) {
    if (m_.empty()) {
      for (const auto& b : params.blocks) {
        m_.push_back(Tensor::zeros(b.value.shape()));
        v_.push_back(Tensor::zeros(b.value.shape()));
      }
    }
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, t_);
    const double bc2 = 1.0 - std::pow(beta2_, t_);
    for (std::size_t i = 0; i < params.blocks.size(); ++i) {
      Tensor& w = params.blocks[i].value;
      const Tensor& g = grads[i];
      Tensor& m = m_[i];
      Tensor& v = v_[i];
      for (std::int64_t j = 0; j < w.numel(); ++j) {
        m[j] = beta1_ * m[j] + (1.0 - beta1_) * g[j];
        v[j] = beta2_ * v[j] + (1.0 - beta2_) * g[j] * g[j];
        const double mhat = m[j] / bc1;
        const double vhat = v[j] / bc2;
        w[j] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
      }
    }
  }

 private:
  double lr_, beta1_, beta2_, eps_;
  int t_ = 0;
  std::vector<Tensor> m_, v_;
};

}  // namespace fraudlab::numerics
