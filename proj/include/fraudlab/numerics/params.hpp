#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fraudlab/numerics/tensor.hpp"
#include "fraudlab/rng.hpp"
#include "fraudlab/sha256.hpp"

namespace fraudlab::numerics {

// Named parameter block. Models keep a flat list of these; the trainer and
// the artifact serializer address them by name.
struct ParamBlock {
  std::string name;
  Tensor value;
};

struct ParamSet {
  std::vector<ParamBlock> blocks;

  Tensor& add(const std::string& name, Tensor t) {
    blocks.push_back({name, std::move(t)});
    return blocks.back().value;
  }

  Tensor* find(const std::string& name) {
    for (auto& b : blocks)
      if (b.name == name) return &b.value;
    return nullptr;
  }

  const Tensor* find(const std::string& name) const {
    for (const auto& b : blocks)
      if (b.name == name) return &b.value;
    return nullptr;
  }

  std::int64_t total_size() const {
    std::int64_t n = 0;
    for (const auto& b : blocks) n += b.value.numel();
    return n;
  }

  std::vector<double> flatten() const {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(total_size()));
    for (const auto& b : blocks)
      out.insert(out.end(), b.value.vec().begin(), b.value.vec().end());
    return out;
  }

  void unflatten(const std::vector<double>& flat) {
    std::size_t pos = 0;
    for (auto& b : blocks) {
      std::copy(flat.begin() + static_cast<std::ptrdiff_t>(pos),
                flat.begin() + static_cast<std::ptrdiff_t>(pos + b.value.vec().size()),
                b.value.vec().begin());
      pos += b.value.vec().size();
    }
  }

  // Order- and value-sensitive digest over every block (name, shape, bytes).
  std::string digest() const {
    Sha256 h;
    for (const auto& b : blocks) {
      h.update(b.name);
      for (auto d : b.value.shape()) h.update(&d, sizeof(d));
      h.update(b.value.data(),
               static_cast<std::size_t>(b.value.numel()) * sizeof(double));
    }
    return h.hex_digest();
  }
};

// Glorot-style uniform init in [-s, s], s = sqrt(6 / (fan_in + fan_out)).
inline Tensor glorot(std::int64_t fan_in, std::int64_t fan_out, Rng& rng) {
  const double s = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Tensor t({fan_in, fan_out});
  for (std::int64_t i = 0; i < t.numel(); ++i) t[i] = rng.uniform(-s, s);
  return t;
}

}  // namespace fraudlab::numerics
