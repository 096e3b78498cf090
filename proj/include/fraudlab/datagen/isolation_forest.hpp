#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "fraudlab/numerics/tensor.hpp"

namespace fraudlab::datagen {

// Isolation forest over a row-major feature matrix. Scores follow the
// 2^(-E[path length]/c(n)) normalization; defaults are 100 trees with
// subsamples of 256.
class IsolationForestModel {
 public:
  static IsolationForestModel fit(const numerics::Tensor& features,
                                  int tree_count, std::int64_t subsample_size,
                                  std::uint64_t seed);

  // anomaly score in (0, 1)
  double score(const double* row) const;
  double score(const std::vector<double>& row) const { return score(row.data()); }

  int tree_count() const { return static_cast<int>(trees_.size()); }
  std::int64_t subsample_size() const { return subsample_; }
  int max_depth_built() const;

 private:
  struct Node {
    int feature = -1;   // -1 marks a leaf
    double split = 0.0;
    std::int64_t size = 0;
    int left = -1;
    int right = -1;
  };
  struct Tree {
    std::vector<Node> nodes;
  };

  double path_length(const Tree& t, const double* row) const;

  std::vector<Tree> trees_;
  std::int64_t subsample_ = 0;
  std::int64_t n_features_ = 0;
  int depth_cap_ = 0;
};

// Expected path length of an unsuccessful BST search over n points.
double isolation_c_factor(std::int64_t n);

}  // namespace fraudlab::datagen
