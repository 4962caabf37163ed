#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <utility>

#include "mint/tensor.hpp"

namespace mint {

enum class PoolKind { max, avg };

//! Round half away from zero.
inline std::int64_t iround(double x) { return std::llround(x); }

//! Largest magnitude representable at `bits` in the symmetric signed range,
//! i.e. 2^(bits-1) - 1. The most negative two's-complement value is excluded.
inline std::int64_t qlevels(int bits) {
  return (static_cast<std::int64_t>(1) << (bits - 1)) - 1;
}

//! Clamp into the symmetric signed `bits`-wide range. Total function.
inline std::int32_t saturating_cast(std::int64_t x, int bits) {
  const std::int64_t lim = qlevels(bits);
  return static_cast<std::int32_t>(std::clamp<std::int64_t>(x, -lim, lim));
}

inline Index conv_out_dim(Index in, Index k, int stride, int padding) {
  return (in + 2 * padding - k) / stride + 1;
}

//! Cross-correlation of an NCHW input with an OIHW kernel, zero padding.
//! Integer instantiations accumulate in 64-bit and store 32-bit exact results.
template <typename Scalar>
Tensor<Scalar> conv2d(const Tensor<Scalar>& input, const Tensor<Scalar>& kernel, int stride = 1,
                      int padding = 0) {
  if (input.rank() != 4 || kernel.rank() != 4)
    throw ShapeError("conv2d expects NCHW input and OIHW kernel, got " + shape_str(input.shape()) +
                     " and " + shape_str(kernel.shape()));
  if (input.dim(1) != kernel.dim(1))
    throw ShapeError("conv2d channel mismatch: input " + shape_str(input.shape()) + " vs kernel " +
                     shape_str(kernel.shape()));
  if (stride < 1 || padding < 0) throw ValueError("conv2d: stride must be >= 1, padding >= 0");

  const Index n = input.dim(0), ci = input.dim(1), h = input.dim(2), w = input.dim(3);
  const Index co = kernel.dim(0), kh = kernel.dim(2), kw = kernel.dim(3);
  const Index oh = conv_out_dim(h, kh, stride, padding);
  const Index ow = conv_out_dim(w, kw, stride, padding);
  if (oh < 1 || ow < 1)
    throw ShapeError("conv2d: kernel " + shape_str(kernel.shape()) + " larger than padded input " +
                     shape_str(input.shape()));

  Tensor<Scalar> out({n, co, oh, ow});
  for (Index b = 0; b < n; ++b)
    for (Index o = 0; o < co; ++o)
      for (Index y = 0; y < oh; ++y)
        for (Index x = 0; x < ow; ++x) {
          Scalar acc = 0;
          for (Index i = 0; i < ci; ++i)
            for (Index dy = 0; dy < kh; ++dy) {
              const Index iy = y * stride + dy - padding;
              if (iy < 0 || iy >= h) continue;
              for (Index dx = 0; dx < kw; ++dx) {
                const Index ix = x * stride + dx - padding;
                if (ix < 0 || ix >= w) continue;
                acc += input.at4(b, i, iy, ix) * kernel.at4(o, i, dy, dx);
              }
            }
          out.at4(b, o, y, x) = acc;
        }
  return out;
}

//! y[n,o] = sum_i W[o,i] * x[n,i] for a 2-d activation [N, in].
template <typename Scalar>
Tensor<Scalar> linear(const Tensor<Scalar>& input, const Tensor<Scalar>& weights) {
  if (input.rank() != 2 || weights.rank() != 2 || input.dim(1) != weights.dim(1))
    throw ShapeError("linear: need [N,in] x [out,in], got " + shape_str(input.shape()) + " and " +
                     shape_str(weights.shape()));
  const Index n = input.dim(0), in = input.dim(1), out = weights.dim(0);
  Tensor<Scalar> y({n, out});
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::Map<const Mat> xm(input.data(), n, in);
  Eigen::Map<const Mat> wm(weights.data(), out, in);
  Eigen::Map<Mat> ym(y.data(), n, out);
  ym.noalias() = xm * wm.transpose();
  return y;
}

struct PoolResult {
  TensorR values;
  TensorI argmax;  // flat input offset per output element; -1 for avg pooling
};

template <typename Scalar>
Tensor<Scalar> pool2d(const Tensor<Scalar>& input, int window, int stride, PoolKind kind) {
  if (input.rank() != 4) throw ShapeError("pool2d expects NCHW, got " + shape_str(input.shape()));
  if (window < 1 || stride < 1) throw ValueError("pool2d: window and stride must be >= 1");
  const Index n = input.dim(0), c = input.dim(1), h = input.dim(2), w = input.dim(3);
  if (window > h || window > w)
    throw ShapeError("pool2d: window " + std::to_string(window) + " larger than input " +
                     shape_str(input.shape()));
  const Index oh = (h - window) / stride + 1;
  const Index ow = (w - window) / stride + 1;
  Tensor<Scalar> out({n, c, oh, ow});
  for (Index b = 0; b < n; ++b)
    for (Index i = 0; i < c; ++i)
      for (Index y = 0; y < oh; ++y)
        for (Index x = 0; x < ow; ++x) {
          Scalar best = input.at4(b, i, y * stride, x * stride);
          Scalar sum = 0;
          for (Index dy = 0; dy < window; ++dy)
            for (Index dx = 0; dx < window; ++dx) {
              const Scalar v = input.at4(b, i, y * stride + dy, x * stride + dx);
              best = std::max(best, v);
              sum += v;
            }
          out.at4(b, i, y, x) =
              kind == PoolKind::max ? best : sum / static_cast<Scalar>(window * window);
        }
  return out;
}

//! Max pooling that remembers the winning input offset (first maximum in
//! row-major scan order) so gradients can be routed back.
PoolResult maxpool2d_with_argmax(const TensorR& input, int window, int stride);

//! Scatter pooled gradients back through cached argmax offsets.
TensorR maxpool2d_backward(const TensorR& grad_out, const TensorI& argmax, const Shape& in_shape);

//! Gradients of conv2d w.r.t. kernel and input.
TensorR conv2d_grad_kernel(const TensorR& input, const TensorR& grad_out, const Shape& kernel_shape,
                           int stride, int padding);
TensorR conv2d_grad_input(const TensorR& kernel, const TensorR& grad_out, const Shape& input_shape,
                          int stride, int padding);

}  // namespace mint
