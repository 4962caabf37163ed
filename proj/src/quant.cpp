#include "mint/quant.hpp"

#include <cmath>

namespace mint {

double compute_alpha(const TensorR& weights, int bits) {
  if (weights.empty()) throw ValueError("compute_alpha: empty weight tensor");
  if (bits < 2 || bits > 32) throw ValueError("compute_alpha: bits must be in [2, 32]");
  double m = 0.0;
  for (Index i = 0; i < weights.size(); ++i) m = std::max(m, std::abs(std::tanh(weights[i])));
  const double alpha = m / static_cast<double>(qlevels(bits));
  return std::max(alpha, kEpsAlpha);
}

TensorI quantize_weights(const TensorR& weights, double alpha, int bits) {
  if (alpha <= 0.0) throw ValueError("quantize_weights: alpha must be positive");
  TensorI q(weights.shape());
  for (Index i = 0; i < weights.size(); ++i)
    q[i] = saturating_cast(iround(weights[i] / alpha), bits);
  return q;
}

std::int32_t fold_threshold(double v_th, double alpha) {
  if (v_th <= 0.0 || alpha <= 0.0) throw ValueError("fold_threshold: v_th and alpha must be > 0");
  const double ratio = v_th / alpha;
  const double capped = std::min(ratio, 2.0e9);
  return static_cast<std::int32_t>(std::floor(capped)) + 1;
}

double fake_quant_scalar(double r, double alpha, int bits) {
  const auto s = static_cast<double>(qlevels(bits));
  const double k = std::clamp(static_cast<double>(iround(r / alpha)), -s, s);
  return alpha * k;
}

TensorR fake_quant(const TensorR& r, double alpha, int bits) {
  if (alpha <= 0.0) throw ValueError("fake_quant: alpha must be positive");
  TensorR out(r.shape());
  for (Index i = 0; i < r.size(); ++i) out[i] = fake_quant_scalar(r[i], alpha, bits);
  return out;
}

FakeQuantGrads fake_quant_backward(const TensorR& upstream, const TensorR& r, double alpha,
                                   int bits) {
  if (!upstream.same_shape(r)) throw ShapeError("fake_quant_backward: operand shape mismatch");
  const auto s = static_cast<double>(qlevels(bits));
  FakeQuantGrads g{TensorR(r.shape()), 0.0};
  for (Index i = 0; i < r.size(); ++i) {
    const double x = r[i] / alpha;
    const bool inside = std::abs(x) <= s;
    g.grad_r[i] = inside ? upstream[i] : 0.0;
    const double k = std::clamp(static_cast<double>(iround(x)), -s, s);
    g.grad_alpha += upstream[i] * (inside ? k - x : k);
  }
  g.grad_alpha *= lsq_grad_scale(r.size(), bits);
  return g;
}

double lsq_grad_scale(Index n_elements, int bits) {
  return 1.0 / std::sqrt(static_cast<double>(n_elements) * static_cast<double>(qlevels(bits)));
}

double lsq_alpha_init(const TensorR& weights, int bits) {
  const double mean_abs = weights.flat().abs().mean();
  const double alpha = 2.0 * mean_abs / std::sqrt(static_cast<double>(qlevels(bits)));
  return std::max(alpha, kEpsAlpha);
}

}  // namespace mint
