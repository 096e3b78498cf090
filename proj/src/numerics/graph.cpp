#include "fraudlab/numerics/graph.hpp"

#include <cmath>

namespace fraudlab::numerics {

namespace {

constexpr double kLogClamp = 1e-12;
constexpr double kLayerNormEps = 1e-5;

double stable_sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// Stabilized softmax of one contiguous row, honoring an optional {0,1} mask.
// Masked entries come out exactly 0.
void softmax_row(const double* x, const double* mask, double* out,
                 std::int64_t n) {
  double mx = -std::numeric_limits<double>::infinity();
  for (std::int64_t i = 0; i < n; ++i)
    if (!mask || mask[i] != 0.0) mx = std::max(mx, x[i]);
  if (mx == -std::numeric_limits<double>::infinity())
    throw data_error("softmax: fully masked row");
  double sum = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    if (mask && mask[i] == 0.0) {
      out[i] = 0.0;
    } else {
      out[i] = std::exp(x[i] - mx);
      sum += out[i];
    }
  }
  for (std::int64_t i = 0; i < n; ++i) out[i] /= sum;
}

}  // namespace

Tensor softmax_vector(const Tensor& logits) {
  if (logits.numel() == 0) throw data_error("empty logits");
  if (!logits.all_finite()) throw data_error("softmax: non-finite input");
  Tensor out(logits.shape());
  softmax_row(logits.data(), nullptr, out.data(), logits.numel());
  return out;
}

double weighted_bce_scalar(double p, double y, double w_pos, double w_neg) {
  if (w_pos <= 0.0 || w_neg <= 0.0) throw data_error("nonpositive class weight");
  const double pc = std::min(1.0 - kLogClamp, std::max(kLogClamp, p));
  return -(w_pos * y * std::log(pc) + w_neg * (1.0 - y) * std::log(1.0 - pc));
}

Tensor GradientMap::at(int id) const {
  auto it = grads_.find(id);
  if (it != grads_.end()) return it->second;
  return Tensor::zeros(graph_->node(id).out.shape());
}

Var Graph::push(Op op, std::vector<int> in, Tensor out, bool needs_grad,
                double scalar, double scalar2) {
  if (check_finite_ && !out.all_finite())
    throw divergence_error("non-finite value produced by graph op");
  Node n;
  n.op = op;
  n.in = std::move(in);
  n.out = std::move(out);
  n.needs_grad = needs_grad;
  n.scalar = scalar;
  n.scalar2 = scalar2;
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<int>(nodes_.size() - 1)};
}

namespace {

bool any_grad(const Graph& g, std::initializer_list<Var> vars) {
  for (const Var& v : vars)
    if (g.node(v.id).needs_grad) return true;
  return false;
}

}  // namespace

Var Graph::matmul(Var a, Var b) {
  const Tensor& A = value(a.id);
  const Tensor& B = value(b.id);
  Tensor C;
  if (A.rank() == 2 && B.rank() == 2) {
    if (A.dim(1) != B.dim(0)) throw data_error("matmul: inner dims mismatch");
    C = Tensor({A.dim(0), B.dim(1)});
    gemm_nn(A.data(), B.data(), C.data(), A.dim(0), A.dim(1), B.dim(1), false);
  } else if (A.rank() == 3 && B.rank() == 3) {
    if (A.dim(0) != B.dim(0) || A.dim(2) != B.dim(1))
      throw data_error("matmul: batched dims mismatch");
    C = Tensor({A.dim(0), A.dim(1), B.dim(2)});
    const std::int64_t m = A.dim(1), k = A.dim(2), n = B.dim(2);
    for (std::int64_t s = 0; s < A.dim(0); ++s)
      gemm_nn(A.data() + s * m * k, B.data() + s * k * n, C.data() + s * m * n,
              m, k, n, false);
  } else if (A.rank() == 3 && B.rank() == 2) {
    if (A.dim(2) != B.dim(0)) throw data_error("matmul: inner dims mismatch");
    // apply the same matrix to every batch slice: fold (B,m) into rows
    C = Tensor({A.dim(0), A.dim(1), B.dim(1)});
    gemm_nn(A.data(), B.data(), C.data(), A.dim(0) * A.dim(1), A.dim(2),
            B.dim(1), false);
  } else {
    throw data_error("matmul: unsupported ranks " + A.shape_str() + " x " +
                     B.shape_str());
  }
  return push(Op::MatMul, {a.id, b.id}, std::move(C), any_grad(*this, {a, b}));
}

Var Graph::matmul_nt(Var a, Var b) {
  const Tensor& A = value(a.id);
  const Tensor& B = value(b.id);
  Tensor C;
  if (A.rank() == 3 && B.rank() == 3) {
    if (A.dim(0) != B.dim(0) || A.dim(2) != B.dim(2))
      throw data_error("matmul_nt: dims mismatch");
    C = Tensor({A.dim(0), A.dim(1), B.dim(1)});
    const std::int64_t m = A.dim(1), k = A.dim(2), n = B.dim(1);
    for (std::int64_t s = 0; s < A.dim(0); ++s)
      gemm_nt(A.data() + s * m * k, B.data() + s * n * k, C.data() + s * m * n,
              m, k, n, false);
  } else if (A.rank() == 2 && B.rank() == 2) {
    if (A.dim(1) != B.dim(1)) throw data_error("matmul_nt: dims mismatch");
    C = Tensor({A.dim(0), B.dim(0)});
    gemm_nt(A.data(), B.data(), C.data(), A.dim(0), A.dim(1), B.dim(0), false);
  } else {
    throw data_error("matmul_nt: unsupported ranks");
  }
  return push(Op::MatMulNT, {a.id, b.id}, std::move(C), any_grad(*this, {a, b}));
}

Var Graph::add(Var a, Var b) {
  const Tensor& A = value(a.id);
  const Tensor& B = value(b.id);
  if (!A.same_shape(B)) throw data_error("add: shape mismatch");
  Tensor C(A.shape());
  const double* pa = A.data();
  const double* pb = B.data();
  double* pc = C.data();
  for (std::int64_t i = 0; i < A.numel(); ++i) pc[i] = pa[i] + pb[i];
  return push(Op::Add, {a.id, b.id}, std::move(C), any_grad(*this, {a, b}));
}

Var Graph::add_bias(Var a, Var bias) {
  const Tensor& A = value(a.id);
  const Tensor& B = value(bias.id);
  const std::int64_t n = A.last_dim();
  if (B.numel() != n) throw data_error("add_bias: bias length mismatch");
  Tensor C(A.shape());
  const std::int64_t rows = A.numel() / n;
  const double* pa = A.data();
  const double* pb = B.data();
  double* pc = C.data();
  for (std::int64_t r = 0; r < rows; ++r)
    for (std::int64_t j = 0; j < n; ++j) pc[r * n + j] = pa[r * n + j] + pb[j];
  return push(Op::AddBias, {a.id, bias.id}, std::move(C),
              any_grad(*this, {a, bias}));
}

Var Graph::mul(Var a, Var b) {
  const Tensor& A = value(a.id);
  const Tensor& B = value(b.id);
  if (!A.same_shape(B)) throw data_error("mul: shape mismatch");
  Tensor C(A.shape());
  const double* pa = A.data();
  const double* pb = B.data();
  double* pc = C.data();
  for (std::int64_t i = 0; i < A.numel(); ++i) pc[i] = pa[i] * pb[i];
  return push(Op::Mul, {a.id, b.id}, std::move(C), any_grad(*this, {a, b}));
}

Var Graph::scale(Var a, double c) {
  const Tensor& A = value(a.id);
  Tensor C(A.shape());
  for (std::int64_t i = 0; i < A.numel(); ++i) C[i] = A[i] * c;
  return push(Op::Scale, {a.id}, std::move(C), node(a.id).needs_grad, c);
}

Var Graph::sigmoid(Var a) {
  const Tensor& A = value(a.id);
  Tensor C(A.shape());
  for (std::int64_t i = 0; i < A.numel(); ++i) C[i] = stable_sigmoid(A[i]);
  return push(Op::Sigmoid, {a.id}, std::move(C), node(a.id).needs_grad);
}

Var Graph::tanh_act(Var a) {
  const Tensor& A = value(a.id);
  Tensor C(A.shape());
  for (std::int64_t i = 0; i < A.numel(); ++i) C[i] = std::tanh(A[i]);
  return push(Op::Tanh, {a.id}, std::move(C), node(a.id).needs_grad);
}

Var Graph::relu(Var a) {
  const Tensor& A = value(a.id);
  Tensor C(A.shape());
  for (std::int64_t i = 0; i < A.numel(); ++i) C[i] = A[i] > 0.0 ? A[i] : 0.0;
  return push(Op::Relu, {a.id}, std::move(C), node(a.id).needs_grad);
}

Var Graph::softmax(Var a) {
  const Tensor& A = value(a.id);
  const std::int64_t n = A.last_dim();
  if (n == 0) throw data_error("empty logits");
  Tensor C(A.shape());
  const std::int64_t rows = A.numel() / n;
  for (std::int64_t r = 0; r < rows; ++r)
    softmax_row(A.data() + r * n, nullptr, C.data() + r * n, n);
  return push(Op::Softmax, {a.id}, std::move(C), node(a.id).needs_grad);
}

Var Graph::softmax_masked(Var a, Tensor mask) {
  const Tensor& A = value(a.id);
  if (!A.same_shape(mask)) throw data_error("softmax: mask shape mismatch");
  const std::int64_t n = A.last_dim();
  if (n == 0) throw data_error("empty logits");
  Tensor C(A.shape());
  const std::int64_t rows = A.numel() / n;
  for (std::int64_t r = 0; r < rows; ++r)
    softmax_row(A.data() + r * n, mask.data() + r * n, C.data() + r * n, n);
  Var v = push(Op::Softmax, {a.id}, std::move(C), node(a.id).needs_grad);
  mut(v.id).aux = std::move(mask);
  return v;
}

Var Graph::layer_norm(Var a, Var gamma, Var beta) {
  const Tensor& A = value(a.id);
  const Tensor& G = value(gamma.id);
  const Tensor& B = value(beta.id);
  const std::int64_t n = A.last_dim();
  if (G.numel() != n || B.numel() != n)
    throw data_error("layer_norm: parameter length mismatch");
  Tensor C(A.shape());
  const std::int64_t rows = A.numel() / n;
  for (std::int64_t r = 0; r < rows; ++r) {
    const double* x = A.data() + r * n;
    double* y = C.data() + r * n;
    double mean = 0.0;
    for (std::int64_t j = 0; j < n; ++j) mean += x[j];
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::int64_t j = 0; j < n; ++j) var += (x[j] - mean) * (x[j] - mean);
    var /= static_cast<double>(n);
    const double inv = 1.0 / std::sqrt(var + kLayerNormEps);
    for (std::int64_t j = 0; j < n; ++j)
      y[j] = G[j] * ((x[j] - mean) * inv) + B[j];
  }
  return push(Op::LayerNorm, {a.id, gamma.id, beta.id}, std::move(C),
              any_grad(*this, {a, gamma, beta}));
}

Var Graph::concat(const std::vector<Var>& parts) {
  if (parts.empty()) throw data_error("concat: no inputs");
  const Tensor& first = value(parts[0].id);
  std::vector<std::int64_t> shape = first.shape();
  std::int64_t total_last = 0;
  bool needs = false;
  for (const Var& p : parts) {
    const Tensor& t = value(p.id);
    if (t.rank() != first.rank()) throw data_error("concat: rank mismatch");
    for (int d = 0; d + 1 < t.rank(); ++d)
      if (t.dim(d) != first.dim(d)) throw data_error("concat: leading dims mismatch");
    total_last += t.last_dim();
    needs = needs || node(p.id).needs_grad;
  }
  shape.back() = total_last;
  Tensor C(shape);
  const std::int64_t rows = C.numel() / total_last;
  std::int64_t offset = 0;
  for (const Var& p : parts) {
    const Tensor& t = value(p.id);
    const std::int64_t w = t.last_dim();
    for (std::int64_t r = 0; r < rows; ++r)
      std::copy(t.data() + r * w, t.data() + (r + 1) * w,
                C.data() + r * total_last + offset);
    offset += w;
  }
  std::vector<int> in;
  for (const Var& p : parts) in.push_back(p.id);
  return push(Op::Concat, std::move(in), std::move(C), needs);
}

Var Graph::gather_rows(Var table, std::vector<std::int64_t> indices) {
  const Tensor& T = value(table.id);
  if (T.rank() != 2) throw data_error("gather: table must be rank 2");
  const std::int64_t e = T.dim(1);
  Tensor C({static_cast<std::int64_t>(indices.size()), e});
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const std::int64_t i = indices[r];
    if (i < 0 || i >= T.dim(0)) throw data_error("gather: index out of range");
    std::copy(T.data() + i * e, T.data() + (i + 1) * e,
              C.data() + static_cast<std::int64_t>(r) * e);
  }
  Var v = push(Op::Gather, {table.id}, std::move(C), node(table.id).needs_grad);
  mut(v.id).idx = std::move(indices);
  return v;
}

Var Graph::slice_last(Var a, std::int64_t index) {
  const Tensor& A = value(a.id);
  const std::int64_t n = A.last_dim();
  if (index < 0 || index >= n) throw data_error("slice: index out of range");
  std::vector<std::int64_t> shape = A.shape();
  shape.back() = 1;
  Tensor C(shape);
  const std::int64_t rows = A.numel() / n;
  for (std::int64_t r = 0; r < rows; ++r) C[r] = A[r * n + index];
  Var v = push(Op::SliceLast, {a.id}, std::move(C), node(a.id).needs_grad);
  mut(v.id).index = index;
  return v;
}

Var Graph::slice_cols(Var a, std::int64_t start, std::int64_t count) {
  const Tensor& A = value(a.id);
  const std::int64_t n = A.last_dim();
  if (start < 0 || count < 1 || start + count > n)
    throw data_error("slice: range out of bounds");
  std::vector<std::int64_t> shape = A.shape();
  shape.back() = count;
  Tensor C(shape);
  const std::int64_t rows = A.numel() / n;
  for (std::int64_t r = 0; r < rows; ++r)
    std::copy(A.data() + r * n + start, A.data() + r * n + start + count,
              C.data() + r * count);
  Var v = push(Op::SliceCols, {a.id}, std::move(C), node(a.id).needs_grad);
  mut(v.id).index = start;
  return v;
}

Var Graph::reshape(Var a, std::vector<std::int64_t> shape) {
  Tensor C = value(a.id).reshaped(std::move(shape));
  return push(Op::Reshape, {a.id}, std::move(C), node(a.id).needs_grad);
}

Var Graph::sum_all(Var a) {
  const Tensor& A = value(a.id);
  double s = 0.0;
  for (std::int64_t i = 0; i < A.numel(); ++i) s += A[i];
  return push(Op::SumAll, {a.id}, Tensor::scalar(s), node(a.id).needs_grad);
}

Var Graph::mean_all(Var a) {
  const Tensor& A = value(a.id);
  if (A.numel() == 0) throw data_error("mean: empty tensor");
  double s = 0.0;
  for (std::int64_t i = 0; i < A.numel(); ++i) s += A[i];
  return push(Op::MeanAll, {a.id},
              Tensor::scalar(s / static_cast<double>(A.numel())),
              node(a.id).needs_grad);
}

Var Graph::sum_last(Var a) {
  const Tensor& A = value(a.id);
  const std::int64_t n = A.last_dim();
  std::vector<std::int64_t> shape = A.shape();
  shape.back() = 1;
  Tensor C(shape);
  const std::int64_t rows = A.numel() / n;
  for (std::int64_t r = 0; r < rows; ++r) {
    double s = 0.0;
    for (std::int64_t j = 0; j < n; ++j) s += A[r * n + j];
    C[r] = s;
  }
  return push(Op::SumLast, {a.id}, std::move(C), node(a.id).needs_grad);
}

Var Graph::sum_mid(Var a) {
  const Tensor& A = value(a.id);
  if (A.rank() != 3) throw data_error("sum_mid: expects rank 3");
  const std::int64_t b = A.dim(0), w = A.dim(1), d = A.dim(2);
  Tensor C({b, d});
  for (std::int64_t s = 0; s < b; ++s)
    for (std::int64_t t = 0; t < w; ++t)
      for (std::int64_t j = 0; j < d; ++j)
        C[s * d + j] += A[(s * w + t) * d + j];
  return push(Op::SumMid, {a.id}, std::move(C), node(a.id).needs_grad);
}

Var Graph::weighted_bce(Var p, Tensor labels, double w_pos, double w_neg) {
  if (w_pos <= 0.0 || w_neg <= 0.0) throw data_error("nonpositive class weight");
  const Tensor& P = value(p.id);
  if (!P.same_shape(labels)) throw data_error("wbce: label shape mismatch");
  Tensor C(P.shape());
  for (std::int64_t i = 0; i < P.numel(); ++i)
    C[i] = weighted_bce_scalar(P[i], labels[i], w_pos, w_neg);
  Var v = push(Op::Wbce, {p.id}, std::move(C), node(p.id).needs_grad, w_pos, w_neg);
  mut(v.id).aux = std::move(labels);
  return v;
}

Var Graph::entropy_rows(Var g) {
  const Tensor& G = value(g.id);
  const std::int64_t n = G.last_dim();
  std::vector<std::int64_t> shape = G.shape();
  shape.back() = 1;
  Tensor C(shape);
  const std::int64_t rows = G.numel() / n;
  for (std::int64_t r = 0; r < rows; ++r) {
    double h = 0.0;
    for (std::int64_t j = 0; j < n; ++j) {
      const double gv = G[r * n + j];
      if (gv > 0.0) h -= gv * std::log(gv);
    }
    C[r] = h;
  }
  return push(Op::Entropy, {g.id}, std::move(C), node(g.id).needs_grad);
}

GradientMap Graph::backward(Var loss) {
  if (loss.graph != this) throw data_error("backward: var from another graph");
  const Node& loss_node = node(loss.id);
  if (loss_node.out.numel() != 1)
    throw data_error("backward: loss must be scalar");

  std::vector<Tensor> grads(nodes_.size());
  std::vector<bool> has_grad(nodes_.size(), false);

  auto touch = [&](int id) -> Tensor& {
    if (!has_grad[static_cast<std::size_t>(id)]) {
      grads[static_cast<std::size_t>(id)] =
          Tensor::zeros(node(id).out.shape());
      has_grad[static_cast<std::size_t>(id)] = true;
    }
    return grads[static_cast<std::size_t>(id)];
  };

  touch(loss.id)[0] = 1.0;

  for (int id = loss.id; id >= 0; --id) {
    const Node& n = node(id);
    if (!n.needs_grad || !has_grad[static_cast<std::size_t>(id)]) continue;
    const Tensor& g = grads[static_cast<std::size_t>(id)];
    switch (n.op) {
      case Op::Constant:
      case Op::Param:
        break;
      case Op::MatMul: {
        const Tensor& A = value(n.in[0]);
        const Tensor& B = value(n.in[1]);
        const bool ga = node(n.in[0]).needs_grad;
        const bool gb = node(n.in[1]).needs_grad;
        if (A.rank() == 2) {
          const std::int64_t m = A.dim(0), k = A.dim(1), nn = B.dim(1);
          if (ga) gemm_nt(g.data(), B.data(), touch(n.in[0]).data(), m, nn, k, true);
          if (gb) gemm_tn(A.data(), g.data(), touch(n.in[1]).data(), m, k, nn, true);
        } else if (B.rank() == 3) {
          const std::int64_t s = A.dim(0), m = A.dim(1), k = A.dim(2), nn = B.dim(2);
          for (std::int64_t i = 0; i < s; ++i) {
            if (ga)
              gemm_nt(g.data() + i * m * nn, B.data() + i * k * nn,
                      touch(n.in[0]).data() + i * m * k, m, nn, k, true);
            if (gb)
              gemm_tn(A.data() + i * m * k, g.data() + i * m * nn,
                      touch(n.in[1]).data() + i * k * nn, m, k, nn, true);
          }
        } else {
          // (B,m,k) x (k,n): flatten batch rows
          const std::int64_t m = A.dim(0) * A.dim(1), k = A.dim(2), nn = B.dim(1);
          if (ga) gemm_nt(g.data(), B.data(), touch(n.in[0]).data(), m, nn, k, true);
          if (gb) gemm_tn(A.data(), g.data(), touch(n.in[1]).data(), m, k, nn, true);
        }
        break;
      }
      case Op::MatMulNT: {
        const Tensor& A = value(n.in[0]);
        const Tensor& B = value(n.in[1]);
        const bool ga = node(n.in[0]).needs_grad;
        const bool gb = node(n.in[1]).needs_grad;
        if (A.rank() == 3) {
          const std::int64_t s = A.dim(0), m = A.dim(1), k = A.dim(2), nn = B.dim(1);
          for (std::int64_t i = 0; i < s; ++i) {
            if (ga)
              gemm_nn(g.data() + i * m * nn, B.data() + i * nn * k,
                      touch(n.in[0]).data() + i * m * k, m, nn, k, true);
            if (gb)
              gemm_tn(g.data() + i * m * nn, A.data() + i * m * k,
                      touch(n.in[1]).data() + i * nn * k, m, nn, k, true);
          }
        } else {
          const std::int64_t m = A.dim(0), k = A.dim(1), nn = B.dim(0);
          if (ga) gemm_nn(g.data(), B.data(), touch(n.in[0]).data(), m, nn, k, true);
          if (gb) gemm_tn(g.data(), A.data(), touch(n.in[1]).data(), m, nn, k, true);
        }
        break;
      }
      case Op::Add: {
        for (int s = 0; s < 2; ++s) {
          if (!node(n.in[static_cast<std::size_t>(s)]).needs_grad) continue;
          Tensor& t = touch(n.in[static_cast<std::size_t>(s)]);
          for (std::int64_t i = 0; i < g.numel(); ++i) t[i] += g[i];
        }
        break;
      }
      case Op::AddBias: {
        const std::int64_t w = value(n.in[1]).numel();
        const std::int64_t rows = g.numel() / w;
        if (node(n.in[0]).needs_grad) {
          Tensor& t = touch(n.in[0]);
          for (std::int64_t i = 0; i < g.numel(); ++i) t[i] += g[i];
        }
        if (node(n.in[1]).needs_grad) {
          Tensor& t = touch(n.in[1]);
          for (std::int64_t r = 0; r < rows; ++r)
            for (std::int64_t j = 0; j < w; ++j) t[j] += g[r * w + j];
        }
        break;
      }
      case Op::Mul: {
        const Tensor& A = value(n.in[0]);
        const Tensor& B = value(n.in[1]);
        if (node(n.in[0]).needs_grad) {
          Tensor& t = touch(n.in[0]);
          for (std::int64_t i = 0; i < g.numel(); ++i) t[i] += g[i] * B[i];
        }
        if (node(n.in[1]).needs_grad) {
          Tensor& t = touch(n.in[1]);
          for (std::int64_t i = 0; i < g.numel(); ++i) t[i] += g[i] * A[i];
        }
        break;
      }
      case Op::Scale: {
        Tensor& t = touch(n.in[0]);
        for (std::int64_t i = 0; i < g.numel(); ++i) t[i] += g[i] * n.scalar;
        break;
      }
      case Op::Sigmoid: {
        Tensor& t = touch(n.in[0]);
        for (std::int64_t i = 0; i < g.numel(); ++i) {
          const double s = n.out[i];
          t[i] += g[i] * s * (1.0 - s);
        }
        break;
      }
      case Op::Tanh: {
        Tensor& t = touch(n.in[0]);
        for (std::int64_t i = 0; i < g.numel(); ++i)
          t[i] += g[i] * (1.0 - n.out[i] * n.out[i]);
        break;
      }
      case Op::Relu: {
        const Tensor& A = value(n.in[0]);
        Tensor& t = touch(n.in[0]);
        for (std::int64_t i = 0; i < g.numel(); ++i)
          if (A[i] > 0.0) t[i] += g[i];
        break;
      }
      case Op::Softmax: {
        // dX_i = s_i * (g_i - sum_j g_j s_j); masked entries have s = 0
        Tensor& t = touch(n.in[0]);
        const std::int64_t w = n.out.last_dim();
        const std::int64_t rows = g.numel() / w;
        for (std::int64_t r = 0; r < rows; ++r) {
          double dot = 0.0;
          for (std::int64_t j = 0; j < w; ++j) dot += g[r * w + j] * n.out[r * w + j];
          for (std::int64_t j = 0; j < w; ++j)
            t[r * w + j] += n.out[r * w + j] * (g[r * w + j] - dot);
        }
        break;
      }
      case Op::LayerNorm: {
        const Tensor& A = value(n.in[0]);
        const Tensor& G = value(n.in[1]);
        const std::int64_t w = A.last_dim();
        const std::int64_t rows = A.numel() / w;
        const bool gx = node(n.in[0]).needs_grad;
        const bool gg = node(n.in[1]).needs_grad;
        const bool gb = node(n.in[2]).needs_grad;
        std::vector<double> xhat(static_cast<std::size_t>(w));
        for (std::int64_t r = 0; r < rows; ++r) {
          const double* x = A.data() + r * w;
          double mean = 0.0;
          for (std::int64_t j = 0; j < w; ++j) mean += x[j];
          mean /= static_cast<double>(w);
          double var = 0.0;
          for (std::int64_t j = 0; j < w; ++j) var += (x[j] - mean) * (x[j] - mean);
          var /= static_cast<double>(w);
          const double inv = 1.0 / std::sqrt(var + kLayerNormEps);
          for (std::int64_t j = 0; j < w; ++j)
            xhat[static_cast<std::size_t>(j)] = (x[j] - mean) * inv;
          if (gg) {
            Tensor& t = touch(n.in[1]);
            for (std::int64_t j = 0; j < w; ++j)
              t[j] += g[r * w + j] * xhat[static_cast<std::size_t>(j)];
          }
          if (gb) {
            Tensor& t = touch(n.in[2]);
            for (std::int64_t j = 0; j < w; ++j) t[j] += g[r * w + j];
          }
          if (gx) {
            Tensor& t = touch(n.in[0]);
            double mean_gv = 0.0, mean_gvx = 0.0;
            for (std::int64_t j = 0; j < w; ++j) {
              const double gv = g[r * w + j] * G[j];
              mean_gv += gv;
              mean_gvx += gv * xhat[static_cast<std::size_t>(j)];
            }
            mean_gv /= static_cast<double>(w);
            mean_gvx /= static_cast<double>(w);
            for (std::int64_t j = 0; j < w; ++j) {
              const double gv = g[r * w + j] * G[j];
              t[r * w + j] += inv * (gv - mean_gv -
                                     xhat[static_cast<std::size_t>(j)] * mean_gvx);
            }
          }
        }
        break;
      }
      case Op::Concat: {
        const std::int64_t total = n.out.last_dim();
        const std::int64_t rows = n.out.numel() / total;
        std::int64_t offset = 0;
        for (int src : n.in) {
          const std::int64_t w = value(src).last_dim();
          if (node(src).needs_grad) {
            Tensor& t = touch(src);
            for (std::int64_t r = 0; r < rows; ++r)
              for (std::int64_t j = 0; j < w; ++j)
                t[r * w + j] += g[r * total + offset + j];
          }
          offset += w;
        }
        break;
      }
      case Op::Gather: {
        Tensor& t = touch(n.in[0]);
        const std::int64_t e = t.last_dim();
        for (std::size_t r = 0; r < n.idx.size(); ++r) {
          const std::int64_t row = n.idx[r];
          for (std::int64_t j = 0; j < e; ++j)
            t[row * e + j] += g[static_cast<std::int64_t>(r) * e + j];
        }
        break;
      }
      case Op::SliceLast: {
        Tensor& t = touch(n.in[0]);
        const std::int64_t w = value(n.in[0]).last_dim();
        const std::int64_t rows = g.numel();
        for (std::int64_t r = 0; r < rows; ++r) t[r * w + n.index] += g[r];
        break;
      }
      case Op::SliceCols: {
        Tensor& t = touch(n.in[0]);
        const std::int64_t w = value(n.in[0]).last_dim();
        const std::int64_t count = n.out.last_dim();
        const std::int64_t rows = g.numel() / count;
        for (std::int64_t r = 0; r < rows; ++r)
          for (std::int64_t j = 0; j < count; ++j)
            t[r * w + n.index + j] += g[r * count + j];
        break;
      }
      case Op::Reshape: {
        Tensor& t = touch(n.in[0]);
        for (std::int64_t i = 0; i < g.numel(); ++i) t[i] += g[i];
        break;
      }
      case Op::SumAll: {
        Tensor& t = touch(n.in[0]);
        for (std::int64_t i = 0; i < t.numel(); ++i) t[i] += g[0];
        break;
      }
      case Op::MeanAll: {
        Tensor& t = touch(n.in[0]);
        const double gv = g[0] / static_cast<double>(t.numel());
        for (std::int64_t i = 0; i < t.numel(); ++i) t[i] += gv;
        break;
      }
      case Op::SumLast: {
        Tensor& t = touch(n.in[0]);
        const std::int64_t w = value(n.in[0]).last_dim();
        const std::int64_t rows = g.numel();
        for (std::int64_t r = 0; r < rows; ++r)
          for (std::int64_t j = 0; j < w; ++j) t[r * w + j] += g[r];
        break;
      }
      case Op::SumMid: {
        Tensor& t = touch(n.in[0]);
        const Tensor& A = value(n.in[0]);
        const std::int64_t b = A.dim(0), w = A.dim(1), d = A.dim(2);
        for (std::int64_t s = 0; s < b; ++s)
          for (std::int64_t u = 0; u < w; ++u)
            for (std::int64_t j = 0; j < d; ++j)
              t[(s * w + u) * d + j] += g[s * d + j];
        break;
      }
      case Op::Wbce: {
        const Tensor& P = value(n.in[0]);
        Tensor& t = touch(n.in[0]);
        for (std::int64_t i = 0; i < g.numel(); ++i) {
          const double pc =
              std::min(1.0 - kLogClamp, std::max(kLogClamp, P[i]));
          const double y = n.aux[i];
          t[i] += g[i] * (-(n.scalar * y / pc) +
                          n.scalar2 * (1.0 - y) / (1.0 - pc));
        }
        break;
      }
      case Op::Entropy: {
        const Tensor& G = value(n.in[0]);
        Tensor& t = touch(n.in[0]);
        const std::int64_t w = G.last_dim();
        const std::int64_t rows = g.numel();
        for (std::int64_t r = 0; r < rows; ++r)
          for (std::int64_t j = 0; j < w; ++j) {
            const double gv = std::max(G[r * w + j], kLogClamp);
            t[r * w + j] += g[r] * (-(std::log(gv) + 1.0));
          }
        break;
      }
    }
  }

  std::unordered_map<int, Tensor> out;
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    if (has_grad[i]) out.emplace(static_cast<int>(i), std::move(grads[i]));
  return GradientMap(std::move(out), this);
}

}  // namespace fraudlab::numerics
