#pragma once

#include <cstdint>
#include <vector>

#include "mint/network.hpp"
#include "mint/quant.hpp"
#include "mint/tensor.hpp"

namespace mint {

//! Runtime arithmetic events of one layer. Hidden LIF layers must report zero
//! multiplies; only the direct-encoded first layer performs integer MACs.
struct OpCounts {
  std::uint64_t adds = 0;
  std::uint64_t compares = 0;
  std::uint64_t shifts = 0;
  std::uint64_t multiplies = 0;

  OpCounts& operator+=(const OpCounts& o) {
    adds += o.adds;
    compares += o.compares;
    shifts += o.shifts;
    multiplies += o.multiplies;
    return *this;
  }
};

struct MintLayer {
  LayerKind kind = LayerKind::linear;
  TensorI w_hat;  // n_w-bit values in 32-bit slots
  QuantParams qp;
  int stride = 1;
  int padding = 0;
  PoolKind pool = PoolKind::max;
  int window = 2;
  int pool_stride = 2;
  //! Real value of one integer step on this layer's grid: alpha for hidden
  //! and readout layers, alpha / 255 for the 8-bit fixed-point encoder layer.
  double grid = 1.0;
  bool is_encoder = false;
  bool is_readout = false;
};

struct MintNetwork {
  Shape input_shape;  // {C, H, W}
  std::vector<MintLayer> layers;
  double v_th = 0.5;
  ResetMode reset = ResetMode::hard;
};

//! Integer membrane potentials, one tensor per LIF layer (n_u-bit values in
//! 32-bit slots). Single-owner during an inference pass.
struct MintState {
  std::vector<TensorI> potentials;
};

//! Quantize every weighted layer onto its shared scale: alpha from the stored
//! trained scale when present (else from the weight distribution), integer
//! weights by round-and-saturate, theta by threshold folding. Bit-widths must
//! lie in [2, 8]; the integer path supports max pooling only.
MintNetwork quantize_network(const NetworkSpec& net, int n_w, int n_u, double v_th,
                             ResetMode reset = ResetMode::hard);

struct MintStepOut {
  TensorI spikes;
  TensorI u_next;
};

//! One integer LIF step of a hidden layer: accumulation of unary input
//! spikes, integer threshold comparison, arithmetic-right-shift leak
//! (tau = 0.5), saturating n_u-bit state store. No runtime multiplies.
MintStepOut mint_step(const MintLayer& layer, const TensorI& s_in, const TensorI& u_prev,
                      ResetMode reset = ResetMode::hard, OpCounts* counts = nullptr);

//! Analog input mapped to 8-bit unsigned fixed point with scale 1/255.
struct QuantizedInput {
  TensorI levels;  // integers in [0, 255]
  TensorR values;  // levels / 255, the dequantized grid values
};
QuantizedInput quantize_input_fixed(const TensorR& input);

struct MintForward {
  TensorR logits;  // readout potential dequantized by the layer grid, / T
  SpikeState record;
  std::vector<OpCounts> ops;  // per layer, summed over timesteps
};

//! Integer-only forward over T timesteps. The first weighted layer consumes
//! the fixed-point encoded input with integer MACs; hidden layers run
//! mint_step; the readout accumulates 32-bit integer potential without firing.
MintForward mint_forward(const MintNetwork& net, const TensorR& input, int timesteps);

}  // namespace mint
