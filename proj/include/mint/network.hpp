#pragma once

#include <cstdint>
#include <vector>

#include "mint/ops.hpp"
#include "mint/tensor.hpp"

namespace mint {

enum class LayerKind { conv, linear, pool };
enum class ResetMode { hard, soft };

struct LifConfig {
  double v_th = 0.5;
  double tau = 0.5;
  ResetMode reset = ResetMode::hard;
  int timesteps = 4;

  void validate() const {
    if (v_th <= 0.0 || tau <= 0.0 || tau > 1.0 || timesteps < 1)
      throw ValueError("LifConfig: need v_th > 0, 0 < tau <= 1, timesteps >= 1");
  }
};

//! One layer of a float network: weights for conv/linear, geometry for pool.
struct LayerSpec {
  LayerKind kind = LayerKind::linear;
  TensorR weights;  // OIHW for conv, [out, in] for linear, empty for pool
  int stride = 1;
  int padding = 0;
  PoolKind pool = PoolKind::max;
  int window = 2;
  int pool_stride = 2;
  double alpha = 0.0;  // trained shared scale; 0 means derive from weights

  bool weighted() const { return kind != LayerKind::pool; }

  static LayerSpec conv(TensorR w, int stride = 1, int padding = 0) {
    LayerSpec l;
    l.kind = LayerKind::conv;
    l.weights = std::move(w);
    l.stride = stride;
    l.padding = padding;
    return l;
  }
  static LayerSpec linear(TensorR w) {
    LayerSpec l;
    l.kind = LayerKind::linear;
    l.weights = std::move(w);
    return l;
  }
  static LayerSpec pooling(PoolKind kind, int window = 2, int stride = 2) {
    LayerSpec l;
    l.kind = LayerKind::pool;
    l.pool = kind;
    l.window = window;
    l.pool_stride = stride;
    return l;
  }
};

//! Topologically ordered feed-forward network. The last weighted layer is the
//! readout: it accumulates membrane potential and never fires.
struct NetworkSpec {
  Shape input_shape;  // {C, H, W}
  std::vector<LayerSpec> layers;

  void validate() const;
  std::size_t last_weighted() const;
  //! Output shape of every layer for batch size n (activations flattened to
  //! [N, features] from the first linear layer on).
  std::vector<Shape> activation_shapes(Index batch) const;
  Index output_classes() const;
};

//! Per-layer, per-timestep spike planes of one forward pass. Only LIF layers
//! (hidden weighted layers) carry planes; pool and readout entries stay empty.
struct SpikeState {
  std::vector<std::vector<TensorI>> planes;  // [layer][t], batch in dim 0
  std::vector<bool> lif_layer;

  std::uint64_t total_spikes() const;
  //! neuron-timestep-sample slots across LIF layers
  std::uint64_t total_slots() const;
};

bool spike_records_equal(const SpikeState& a, const SpikeState& b);

}  // namespace mint
