#pragma once

#include "mint/network.hpp"
#include "mint/tensor.hpp"

namespace mint {

struct LifStepOut {
  TensorI spikes;
  TensorR u_next;
};

//! Firing and reset stages applied to a pre-reset drive H: spike where
//! H > v_th (strict), then hard reset U = tau * H * (1 - S) or soft reset
//! U = tau * (H - S * v_th).
LifStepOut lif_fire_reset(const TensorR& h, const LifConfig& cfg);

//! One float LIF step of a fully connected layer: H = W S + U_prev, then
//! fire/reset. W is [out, in], S_in is [N, in] unary, U_prev is [N, out].
LifStepOut lif_step_float(const TensorR& weights, const TensorI& s_in, const TensorR& u_prev,
                          const LifConfig& cfg);

struct NaiveUqAlphas {
  double a1 = 1.0;  // weight scale
  double a2 = 1.0;  // previous-membrane scale
  double a3 = 1.0;  // next-membrane scale
};

enum class UqRounding { nearest, none };

struct NaiveUqOut {
  TensorI spikes;
  TensorR u_hat_next;  // integer-valued when rounding to nearest
};

//! Naive uniform-quantized LIF step with independent scales: the real drive
//! H = a1 * (W_hat S) + a2 * U_hat_prev fires against v_th and the next state
//! solves a3 * U_hat_next = tau * H * (1 - S). Hard reset only; serves as the
//! correctness oracle for the shared-scale collapse.
NaiveUqOut lif_step_naive_uq(const TensorI& w_hat, const NaiveUqAlphas& alphas,
                             const TensorI& s_in, const TensorR& u_hat_prev, const LifConfig& cfg,
                             UqRounding rounding = UqRounding::nearest);

struct FloatForward {
  TensorR logits;  // [N, classes]
  SpikeState record;
};

//! Full-precision reference forward: direct-encoded analog input repeats into
//! layer 1 at every timestep, hidden layers run LIF dynamics, the readout
//! accumulates potential without firing; logits are averaged over timesteps.
FloatForward run_network_float(const NetworkSpec& net, const TensorR& input, const LifConfig& cfg);

}  // namespace mint
