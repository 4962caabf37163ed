#pragma once

#include <cstdint>

#include "mint/ops.hpp"
#include "mint/tensor.hpp"

namespace mint {

//! Floor for the shared scale; keeps degenerate all-zero layers usable.
inline constexpr double kEpsAlpha = 1e-8;

//! Per-layer quantization parameters. `alpha` is the shared scale of the
//! weight/membrane integer grid: a stored integer k denotes the real value
//! k * alpha. `theta` is the folded integer firing threshold.
struct QuantParams {
  double alpha = 1.0;
  int n_w = 8;
  int n_u = 8;
  std::int32_t theta = 1;
  bool learnable = false;

  //! Sentinel for an unquantized (fp32) layer in the training path.
  bool quantized() const { return n_w > 0; }
};

//! Shared scale from the weight distribution: max(|tanh(W)|) / (2^(b-1) - 1),
//! floored at kEpsAlpha.
double compute_alpha(const TensorR& weights, int bits);

//! Round-to-nearest onto the integer grid, then clamp into the symmetric
//! `bits`-wide range. Half-way cases round away from zero.
TensorI quantize_weights(const TensorR& weights, double alpha, int bits);

//! Integer firing threshold theta = floor(v_th / alpha) + 1. For every
//! integer k, (k * alpha > v_th) <=> (k >= theta), including the case where
//! v_th / alpha is exactly integral.
std::int32_t fold_threshold(double v_th, double alpha);

//! Simulated quantization: alpha * clamp(round(r / alpha), -s, s) with
//! s = 2^(bits-1) - 1. Output lies on the same grid the integer engine uses.
TensorR fake_quant(const TensorR& r, double alpha, int bits);
double fake_quant_scalar(double r, double alpha, int bits);

struct FakeQuantGrads {
  TensorR grad_r;
  double grad_alpha = 0.0;
};

//! Straight-through backward of fake_quant. grad_r passes upstream inside the
//! clamp range and is zero beyond it. grad_alpha follows the learned-step-size
//! rule, summed over elements and scaled by lsq_grad_scale.
FakeQuantGrads fake_quant_backward(const TensorR& upstream, const TensorR& r, double alpha,
                                   int bits);

//! Learned-step-size gradient scale g = 1 / sqrt(N * s(bits)).
double lsq_grad_scale(Index n_elements, int bits);

//! Learned-step-size initialization alpha0 = 2 * mean(|W|) / sqrt(s(bits)).
double lsq_alpha_init(const TensorR& weights, int bits);

}  // namespace mint
