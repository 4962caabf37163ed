#pragma once

#include <cstdint>

#include "mint/tensor.hpp"

namespace mint {

//! Deterministic stream generator, splitmix64 core. The stream depends only
//! on the seed and integer arithmetic, so identical seeds reproduce identical
//! tensors on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  //! Uniform double in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  //! Uniform integer in [lo, hi] inclusive.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const std::uint64_t range = static_cast<std::uint64_t>(hi - lo) + 1;
    const std::uint64_t v = static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * range) >> 64);
    return lo + static_cast<std::int64_t>(v);
  }

  //! Approximate standard normal via a 12-uniform sum; avoids libm so the
  //! stream stays bit-identical across platforms.
  double gauss() {
    double s = 0.0;
    for (int i = 0; i < 12; ++i) s += uniform();
    return s - 6.0;
  }

  TensorR uniform_tensor(Shape shape, double lo, double hi) {
    TensorR t(std::move(shape));
    for (Index i = 0; i < t.size(); ++i) t[i] = uniform(lo, hi);
    return t;
  }

  TensorI uniform_int_tensor(Shape shape, std::int32_t lo, std::int32_t hi) {
    TensorI t(std::move(shape));
    for (Index i = 0; i < t.size(); ++i) t[i] = static_cast<std::int32_t>(uniform_int(lo, hi));
    return t;
  }

  //! Derive an independent child stream.
  Rng fork() { return Rng(next_u64() ^ 0xA5A5A5A5A5A5A5A5ull); }

 private:
  std::uint64_t state_;
};

}  // namespace mint
