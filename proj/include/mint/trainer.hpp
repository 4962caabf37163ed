#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mint/lif.hpp"
#include "mint/mint_engine.hpp"
#include "mint/network.hpp"
#include "mint/quant.hpp"
#include "mint/rng.hpp"

namespace mint {

//! Training hyperparameters. Defaults follow the standard SNN recipe:
//! Adam at 1e-3, batch 64, T = 4, tau = 0.5, v_th = 0.5, hard reset,
//! 200 epochs (desk-scale runs override epochs downward).
struct TrainConfig {
  int batch_size = 64;
  double learning_rate = 1e-3;
  int timesteps = 4;
  double tau = 0.5;
  double v_th = 0.5;
  ResetMode reset = ResetMode::hard;
  int epochs = 200;
  int n_w = 0;  // 0 trains the fp32 baseline, otherwise [2, 8]
  int n_u = 0;
  std::uint64_t seed = 1;

  LifConfig lif() const { return LifConfig{v_th, tau, reset, timesteps}; }
  bool quantized() const { return n_w > 0; }
  void validate() const;
};

//! Forward flavor of the training path. `hard` runs the deployable dynamics
//! (binary spikes, grid rounding); `smooth` replaces the firing step with a
//! differentiable ramp and rounding with identity so the backward pass can be
//! checked against finite differences.
enum class SimMode { hard, smooth };

struct SimLayerCache {
  LayerKind kind = LayerKind::linear;
  int stride = 1, padding = 0, window = 2, pool_stride = 2;
  bool weighted = false;
  bool is_encoder = false;
  bool is_readout = false;
  bool quantized = false;
  int n_w = 0, n_u = 0;
  double alpha = 0.0;
  double grid = 0.0;
  std::int32_t theta = 0;
  TensorR w_raw;                  // master weights (straight-through gate source)
  TensorR w_q;                    // weights actually applied (fake-quantized or raw)
  Shape out_shape;                // layer output shape for this batch
  Shape pool_in_shape;            // pool layers: shape of the pooled activation
  std::vector<TensorR> input;     // activation entering the layer, per timestep
  std::vector<TensorR> h;         // pre-reset drive, per timestep
  std::vector<TensorR> spikes;    // 0/1 in hard mode, ramp values in smooth mode
  std::vector<TensorR> u_stored;  // membrane after reset, leak, saturation
  std::vector<TensorI> sat_gate;  // 1 where the state store was NOT clipped
  std::vector<TensorI> argmax;    // pool routing, per timestep
};

struct SimCache {
  SimMode mode = SimMode::hard;
  LifConfig cfg;
  std::vector<SimLayerCache> layers;
  TensorR logits;
};

struct SimResult {
  TensorR logits;
  SpikeState record;
};

//! Per-layer quantization parameters for the simulated forward, mirroring
//! quantize_network's scale choice (stored trained alpha when present).
std::vector<QuantParams> make_qparams(const NetworkSpec& net, int n_w, int n_u);

//! Training-path forward: LIF dynamics with weights passed through simulated
//! quantization and the membrane state stored on the same integer grid the
//! inference engine uses (matched shift leak and saturation). With empty
//! QuantParams (n_w = 0) this is the plain float forward. In hard mode the
//! spike trains equal mint_forward of the correspondingly quantized network.
SimResult forward_simulated(const NetworkSpec& net, const std::vector<QuantParams>& qparams,
                            const TensorR& input, const LifConfig& cfg,
                            SimMode mode = SimMode::hard, SimCache* cache = nullptr);

//! Triangle surrogate of the firing derivative on the normalized drive
//! (threshold at 0, unit width): max(0, 1 - |h|).
double surrogate_spike_grad(double h_normalized);
TensorR surrogate_spike_grad(const TensorR& h_normalized);

//! Integral of the triangle surrogate; the smooth-mode spike value.
double soft_spike(double h_normalized);

struct BpttGradients {
  double loss = 0.0;
  std::vector<TensorR> w_grad;      // per layer; empty for pool layers
  std::vector<double> alpha_grad;   // per layer, learned-step-size scaled
};

//! Cross-entropy BPTT through the cached forward: gradients flow across
//! timesteps via the membrane carry, through the firing step via the
//! surrogate, and through rounding via the straight-through estimator.
BpttGradients backward_bptt(const SimCache& cache, const std::vector<int>& labels);

//! Softmax cross-entropy, mean over the batch.
double cross_entropy(const TensorR& logits, const std::vector<int>& labels, TensorR* grad = nullptr);

struct LabeledData {
  TensorR images;  // [N, C, H, W], values in [0, 1]
  std::vector<int> labels;
  int n_classes = 0;

  Index size() const { return images.empty() ? 0 : images.dim(0); }
};

struct AdamParam {
  TensorR m, v;
  double m_alpha = 0.0, v_alpha = 0.0;
};

struct TrainState {
  NetworkSpec net;  // master float weights; layer.alpha carries the learned scale
  TrainConfig cfg;
  std::vector<AdamParam> opt;
  int epoch = 0;
  std::int64_t steps = 0;
};

struct EpochMetrics {
  int epoch = 0;
  double loss = 0.0;
  double accuracy = 0.0;
  double sparsity = 0.0;
};

struct TrainResult {
  TrainState state;
  std::vector<EpochMetrics> metrics;
};

TrainState init_train_state(NetworkSpec net, const TrainConfig& cfg);

//! One minibatch update (forward, BPTT, Adam, alpha projection).
//! Returns loss, accuracy and sparsity of the batch.
EpochMetrics train_step(TrainState& state, const TensorR& batch, const std::vector<int>& labels);

//! Deterministic epoch loop over a labeled dataset. Aborts with a diagnostic
//! if the loss diverges to NaN.
TrainResult train(NetworkSpec net, const LabeledData& data, const TrainConfig& cfg);

//! Accuracy of the deployable model: integer MINT inference for quantized
//! configs, the float reference forward for fp32.
double evaluate_accuracy(const TrainState& state, const LabeledData& data, int batch_size = 256);

}  // namespace mint
