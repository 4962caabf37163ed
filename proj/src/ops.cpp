#include "mint/ops.hpp"

namespace mint {

PoolResult maxpool2d_with_argmax(const TensorR& input, int window, int stride) {
  if (input.rank() != 4) throw ShapeError("maxpool2d expects NCHW");
  const Index n = input.dim(0), c = input.dim(1), h = input.dim(2), w = input.dim(3);
  if (window > h || window > w) throw ShapeError("maxpool2d: window larger than input");
  const Index oh = (h - window) / stride + 1;
  const Index ow = (w - window) / stride + 1;
  PoolResult r{TensorR({n, c, oh, ow}), TensorI({n, c, oh, ow})};
  for (Index b = 0; b < n; ++b)
    for (Index i = 0; i < c; ++i)
      for (Index y = 0; y < oh; ++y)
        for (Index x = 0; x < ow; ++x) {
          double best = -std::numeric_limits<double>::infinity();
          Index best_off = -1;
          for (Index dy = 0; dy < window; ++dy)
            for (Index dx = 0; dx < window; ++dx) {
              const Index iy = y * stride + dy, ix = x * stride + dx;
              const double v = input.at4(b, i, iy, ix);
              if (v > best) {
                best = v;
                best_off = ((b * c + i) * h + iy) * w + ix;
              }
            }
          r.values.at4(b, i, y, x) = best;
          r.argmax.at4(b, i, y, x) = static_cast<std::int32_t>(best_off);
        }
  return r;
}

TensorR maxpool2d_backward(const TensorR& grad_out, const TensorI& argmax, const Shape& in_shape) {
  TensorR grad_in(in_shape);
  for (Index i = 0; i < grad_out.size(); ++i) grad_in[argmax[i]] += grad_out[i];
  return grad_in;
}

TensorR conv2d_grad_kernel(const TensorR& input, const TensorR& grad_out, const Shape& kernel_shape,
                           int stride, int padding) {
  TensorR gk(kernel_shape);
  const Index n = input.dim(0), ci = input.dim(1), h = input.dim(2), w = input.dim(3);
  const Index co = grad_out.dim(1), oh = grad_out.dim(2), ow = grad_out.dim(3);
  const Index kh = kernel_shape[2], kw = kernel_shape[3];
  for (Index b = 0; b < n; ++b)
    for (Index o = 0; o < co; ++o)
      for (Index y = 0; y < oh; ++y)
        for (Index x = 0; x < ow; ++x) {
          const double g = grad_out.at4(b, o, y, x);
          if (g == 0.0) continue;
          for (Index i = 0; i < ci; ++i)
            for (Index dy = 0; dy < kh; ++dy) {
              const Index iy = y * stride + dy - padding;
              if (iy < 0 || iy >= h) continue;
              for (Index dx = 0; dx < kw; ++dx) {
                const Index ix = x * stride + dx - padding;
                if (ix < 0 || ix >= w) continue;
                gk.at4(o, i, dy, dx) += g * input.at4(b, i, iy, ix);
              }
            }
        }
  return gk;
}

TensorR conv2d_grad_input(const TensorR& kernel, const TensorR& grad_out, const Shape& input_shape,
                          int stride, int padding) {
  TensorR gi(input_shape);
  const Index n = grad_out.dim(0), co = grad_out.dim(1), oh = grad_out.dim(2), ow = grad_out.dim(3);
  const Index ci = kernel.dim(1), kh = kernel.dim(2), kw = kernel.dim(3);
  const Index h = input_shape[2], w = input_shape[3];
  for (Index b = 0; b < n; ++b)
    for (Index o = 0; o < co; ++o)
      for (Index y = 0; y < oh; ++y)
        for (Index x = 0; x < ow; ++x) {
          const double g = grad_out.at4(b, o, y, x);
          if (g == 0.0) continue;
          for (Index i = 0; i < ci; ++i)
            for (Index dy = 0; dy < kh; ++dy) {
              const Index iy = y * stride + dy - padding;
              if (iy < 0 || iy >= h) continue;
              for (Index dx = 0; dx < kw; ++dx) {
                const Index ix = x * stride + dx - padding;
                if (ix < 0 || ix >= w) continue;
                gi.at4(b, i, iy, ix) += g * kernel.at4(o, i, dy, dx);
              }
            }
        }
  return gi;
}

}  // namespace mint
