#include "fraudlab/datagen/isolation_forest.hpp"

#include <algorithm>
#include <cmath>

#include "fraudlab/common.hpp"
#include "fraudlab/rng.hpp"

namespace fraudlab::datagen {

namespace {
constexpr double kEulerMascheroni = 0.5772156649015329;
}

double isolation_c_factor(std::int64_t n) {
  if (n <= 1) return 0.0;
  if (n == 2) return 1.0;
  const double nn = static_cast<double>(n);
  return 2.0 * (std::log(nn - 1.0) + kEulerMascheroni) - 2.0 * (nn - 1.0) / nn;
}

IsolationForestModel IsolationForestModel::fit(const numerics::Tensor& features,
                                               int tree_count,
                                               std::int64_t subsample_size,
                                               std::uint64_t seed) {
  if (features.rank() != 2) throw data_error("isolation forest: rank-2 matrix expected");
  const std::int64_t n = features.dim(0);
  const std::int64_t d = features.dim(1);
  if (tree_count < 1) throw data_error("isolation forest: tree_count must be >= 1");
  if (subsample_size < 2 || subsample_size > n)
    throw data_error("isolation forest: subsample_size out of range");

  IsolationForestModel model;
  model.subsample_ = subsample_size;
  model.n_features_ = d;
  model.depth_cap_ = static_cast<int>(
      std::ceil(std::log2(static_cast<double>(subsample_size))));
  model.trees_.resize(static_cast<std::size_t>(tree_count));

  for (int t = 0; t < tree_count; ++t) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));

    // subsample without replacement (partial Fisher-Yates)
    std::vector<std::int64_t> idx(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
    for (std::int64_t i = 0; i < subsample_size; ++i) {
      const std::int64_t j =
          i + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(n - i)));
      std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
    }
    idx.resize(static_cast<std::size_t>(subsample_size));

    Tree& tree = model.trees_[static_cast<std::size_t>(t)];

    // iterative construction; work items own their row index lists
    struct Work {
      std::vector<std::int64_t> rows;
      int depth;
      int node_slot;
    };
    std::vector<Work> stack;
    tree.nodes.emplace_back();
    stack.push_back({std::move(idx), 0, 0});

    while (!stack.empty()) {
      Work w = std::move(stack.back());
      stack.pop_back();
      Node& node = tree.nodes[static_cast<std::size_t>(w.node_slot)];
      node.size = static_cast<std::int64_t>(w.rows.size());

      if (w.rows.size() <= 1 || w.depth >= model.depth_cap_) continue;  // leaf

      // candidate features must have spread; constant regions become leaves
      std::vector<std::int64_t> candidates;
      for (std::int64_t f = 0; f < d; ++f) {
        double lo = features.at(w.rows[0], f), hi = lo;
        for (std::int64_t r : w.rows) {
          lo = std::min(lo, features.at(r, f));
          hi = std::max(hi, features.at(r, f));
        }
        if (hi > lo) candidates.push_back(f);
      }
      if (candidates.empty()) continue;  // all rows identical: depth-capped leaf

      const std::int64_t f = candidates[rng.below(candidates.size())];
      double lo = features.at(w.rows[0], f), hi = lo;
      for (std::int64_t r : w.rows) {
        lo = std::min(lo, features.at(r, f));
        hi = std::max(hi, features.at(r, f));
      }
      const double split = rng.uniform(lo, hi);

      std::vector<std::int64_t> left, right;
      for (std::int64_t r : w.rows)
        (features.at(r, f) < split ? left : right).push_back(r);
      if (left.empty() || right.empty()) continue;  // degenerate split: leaf

      const int li = static_cast<int>(tree.nodes.size());
      tree.nodes.emplace_back();
      const int ri = static_cast<int>(tree.nodes.size());
      tree.nodes.emplace_back();
      Node& parent = tree.nodes[static_cast<std::size_t>(w.node_slot)];
      parent.feature = static_cast<int>(f);
      parent.split = split;
      parent.left = li;
      parent.right = ri;
      stack.push_back({std::move(left), w.depth + 1, li});
      stack.push_back({std::move(right), w.depth + 1, ri});
    }
  }
  return model;
}

double IsolationForestModel::path_length(const Tree& t, const double* row) const {
  int cur = 0;
  int depth = 0;
  for (;;) {
    const Node& n = t.nodes[static_cast<std::size_t>(cur)];
    if (n.feature < 0)
      return static_cast<double>(depth) + isolation_c_factor(n.size);
    cur = row[n.feature] < n.split ? n.left : n.right;
    ++depth;
  }
}

double IsolationForestModel::score(const double* row) const {
  double total = 0.0;
  for (const Tree& t : trees_) total += path_length(t, row);
  const double avg = total / static_cast<double>(trees_.size());
  return std::pow(2.0, -avg / isolation_c_factor(subsample_));
}

int IsolationForestModel::max_depth_built() const {
  int worst = 0;
  for (const Tree& t : trees_) {
    // depth of each node via breadth-first replay
    std::vector<int> depth(t.nodes.size(), 0);
    for (std::size_t i = 0; i < t.nodes.size(); ++i) {
      const Node& n = t.nodes[i];
      if (n.feature >= 0) {
        depth[static_cast<std::size_t>(n.left)] = depth[i] + 1;
        depth[static_cast<std::size_t>(n.right)] = depth[i] + 1;
        worst = std::max(worst, depth[i] + 1);
      }
    }
  }
  return worst;
}

}  // namespace fraudlab::datagen
