#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "fraudlab/numerics/tensor.hpp"

namespace fraudlab::numerics {

class Graph;

// Lightweight handle to a node inside a Graph.
struct Var {
  Graph* graph = nullptr;
  int id = -1;
  const Tensor& value() const;
};

enum class Op {
  Constant,
  Param,
  MatMul,      // (m,k)x(k,n) | (B,m,k)x(B,k,n) | (B,m,k)x(k,n)
  MatMulNT,    // (B,m,k)x(B,n,k) -> (B,m,n): A * B^T per batch slice
  Add,
  AddBias,     // last-axis bias vector broadcast over leading rows
  Mul,
  Scale,
  Sigmoid,
  Tanh,
  Relu,
  Softmax,     // last axis, optional {0,1} mask; masked entries exactly 0
  LayerNorm,   // last axis, learnable gamma/beta, eps 1e-5
  Concat,      // last axis
  Gather,      // row gather from a (V,e) table by integer index list
  SliceLast,   // take one index of the last axis
  SliceCols,   // contiguous range of the last axis
  Reshape,
  SumAll,
  MeanAll,
  SumLast,     // reduce last axis, keepdim
  SumMid,      // (B,W,d) -> (B,d)
  Wbce,        // per-row weighted binary cross entropy vs constant labels
  Entropy,     // per-row Shannon entropy of a simplex row
};

// Gradients produced by a backward pass, keyed by node id. Nodes the loss
// does not depend on report a zero tensor of the node's output shape.
class GradientMap {
 public:
  GradientMap() = default;
  GradientMap(std::unordered_map<int, Tensor> grads, const Graph* graph)
      : grads_(std::move(grads)), graph_(graph) {}

  // Gradient of the loss w.r.t. node `id` (zeros if detached).
  Tensor at(int id) const;
  Tensor at(const Var& v) const { return at(v.id); }
  bool contains(int id) const { return grads_.count(id) > 0; }

 private:
  std::unordered_map<int, Tensor> grads_;
  const Graph* graph_ = nullptr;
};

// Define-by-run tape: every op evaluates eagerly and records itself, so
// insertion order is a topological order. Backward walks the tape once in
// reverse. Single-threaded by contract; values are immutable once written.
class Graph {
 public:
  struct Node {
    Op op = Op::Constant;
    std::vector<int> in;
    Tensor out;
    bool needs_grad = false;
    // op metadata
    double scalar = 0.0;             // Scale factor, Wbce weights (see below)
    double scalar2 = 0.0;
    std::int64_t index = 0;          // SliceLast index
    Tensor aux;                      // Softmax mask / Wbce labels
    std::vector<std::int64_t> idx;   // Gather row indices
  };

  Var constant(Tensor value) {
    return push(Op::Constant, {}, std::move(value), false);
  }

  Var param(Tensor value) {
    return push(Op::Param, {}, std::move(value), true);
  }

  Var matmul(Var a, Var b);
  Var matmul_nt(Var a, Var b);
  Var add(Var a, Var b);
  Var add_bias(Var a, Var bias);
  Var mul(Var a, Var b);
  Var scale(Var a, double c);
  Var sigmoid(Var a);
  Var tanh_act(Var a);
  Var relu(Var a);
  Var softmax(Var a);
  Var softmax_masked(Var a, Tensor mask);
  Var layer_norm(Var a, Var gamma, Var beta);
  Var concat(const std::vector<Var>& parts);
  Var gather_rows(Var table, std::vector<std::int64_t> indices);
  Var slice_last(Var a, std::int64_t index);
  Var slice_cols(Var a, std::int64_t start, std::int64_t count);
  Var reshape(Var a, std::vector<std::int64_t> shape);
  Var sum_all(Var a);
  Var mean_all(Var a);
  Var sum_last(Var a);
  Var sum_mid(Var a);
  // loss = -[w_pos*y*ln(p) + w_neg*(1-y)*ln(1-p)] per row, p clamped to
  // [1e-12, 1-1e-12] before the log
  Var weighted_bce(Var p, Tensor labels, double w_pos, double w_neg);
  Var entropy_rows(Var g);

  GradientMap backward(Var loss);

  const Node& node(int id) const { return nodes_[static_cast<std::size_t>(id)]; }
  const Tensor& value(int id) const { return node(id).out; }
  std::size_t size() const { return nodes_.size(); }

  // When enabled every op asserts its output is finite (tests only; training
  // checks the loss each step instead).
  void set_check_finite(bool on) { check_finite_ = on; }

 private:
  friend struct Var;

  Var push(Op op, std::vector<int> in, Tensor out, bool needs_grad,
           double scalar = 0.0, double scalar2 = 0.0);

  Node& mut(int id) { return nodes_[static_cast<std::size_t>(id)]; }

  std::vector<Node> nodes_;
  bool check_finite_ = false;
};

inline const Tensor& Var::value() const { return graph->value(id); }

// Stand-alone stabilized softmax over a vector (same math as the graph op).
Tensor softmax_vector(const Tensor& logits);

// Stand-alone weighted binary cross entropy on scalars.
double weighted_bce_scalar(double p, double y, double w_pos, double w_neg);

}  // namespace fraudlab::numerics
