#include "mint/trainer.hpp"

#include <algorithm>
#include <cmath>

namespace mint {

namespace {

TensorR flatten2(const TensorR& t) {
  return t.rank() == 2 ? t : t.reshaped({t.dim(0), t.size() / t.dim(0)});
}

TensorR linear_grad_weights(const TensorR& input2, const TensorR& grad_out) {
  const Index n = input2.dim(0), in = input2.dim(1), out = grad_out.dim(1);
  TensorR gw({out, in});
  using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::Map<const Mat> xm(input2.data(), n, in);
  Eigen::Map<const Mat> gm(grad_out.data(), n, out);
  Eigen::Map<Mat> wm(gw.data(), out, in);
  wm.noalias() = gm.transpose() * xm;
  return gw;
}

TensorR linear_grad_input(const TensorR& weights, const TensorR& grad_out) {
  const Index n = grad_out.dim(0), out = weights.dim(0), in = weights.dim(1);
  TensorR gi({n, in});
  using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::Map<const Mat> wm(weights.data(), out, in);
  Eigen::Map<const Mat> gm(grad_out.data(), n, out);
  Eigen::Map<Mat> im(gi.data(), n, in);
  im.noalias() = gm * wm;
  return gi;
}

// Clamp-only weight transform for the smooth (differentiable) mode.
TensorR clamp_quant(const TensorR& w, double alpha, int bits) {
  const auto s = static_cast<double>(qlevels(bits));
  TensorR out(w.shape());
  for (Index i = 0; i < w.size(); ++i) out[i] = alpha * std::clamp(w[i] / alpha, -s, s);
  return out;
}

bool grid_exact(const QuantParams& qp) { return qp.quantized() && qp.n_w <= 8 && qp.n_u <= 8; }

struct LayerPlan {
  bool weighted = false;
  bool encoder = false;
  bool readout = false;
  bool quantized = false;
  bool exact = false;        // integer-grid state tracking
  bool clamp_state = false;  // n_u <= 8; wider membranes are full precision
  double alpha = 0.0;
  double grid = 0.0;
  std::int32_t theta = 0;
  std::int64_t s_u = 0;
};

std::vector<LayerPlan> plan_layers(const NetworkSpec& net, const std::vector<QuantParams>& qparams,
                                   const LifConfig& cfg) {
  if (!qparams.empty() && qparams.size() != net.layers.size())
    throw ShapeError("forward_simulated: one QuantParams entry per layer required");
  std::vector<LayerPlan> plans(net.layers.size());
  const std::size_t readout = net.last_weighted();
  bool encoder_assigned = false;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    LayerPlan& p = plans[l];
    p.weighted = net.layers[l].weighted();
    if (!p.weighted) continue;
    p.encoder = !encoder_assigned;
    encoder_assigned = true;
    p.readout = l == readout;
    if (!qparams.empty() && qparams[l].quantized()) {
      p.quantized = true;
      p.exact = grid_exact(qparams[l]);
      p.clamp_state = qparams[l].n_u <= 8;
      p.alpha = qparams[l].alpha;
      p.grid = p.encoder ? p.alpha / 255.0 : p.alpha;
      p.theta = fold_threshold(cfg.v_th, p.grid);
      p.s_u = qlevels(qparams[l].n_u);
    }
  }
  return plans;
}

}  // namespace

std::vector<QuantParams> make_qparams(const NetworkSpec& net, int n_w, int n_u) {
  std::vector<QuantParams> qp(net.layers.size());
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    if (!net.layers[l].weighted() || n_w == 0) {
      qp[l].n_w = 0;
      continue;
    }
    qp[l].alpha = net.layers[l].alpha > 0.0 ? net.layers[l].alpha
                                            : compute_alpha(net.layers[l].weights, n_w);
    qp[l].n_w = n_w;
    qp[l].n_u = n_u;
    qp[l].learnable = net.layers[l].alpha > 0.0;
  }
  return qp;
}

double surrogate_spike_grad(double h) { return std::max(0.0, 1.0 - std::abs(h)); }

TensorR surrogate_spike_grad(const TensorR& h) {
  TensorR g(h.shape());
  for (Index i = 0; i < h.size(); ++i) g[i] = surrogate_spike_grad(h[i]);
  return g;
}

double soft_spike(double h) {
  if (h <= -1.0) return 0.0;
  if (h >= 1.0) return 1.0;
  if (h <= 0.0) return 0.5 * (h + 1.0) * (h + 1.0);
  return 1.0 - 0.5 * (1.0 - h) * (1.0 - h);
}

SimResult forward_simulated(const NetworkSpec& net, const std::vector<QuantParams>& qparams,
                            const TensorR& input, const LifConfig& cfg, SimMode mode,
                            SimCache* cache) {
  net.validate();
  cfg.validate();
  if (input.rank() != 4) throw ShapeError("forward_simulated: input must be NCHW");
  const Index batch = input.dim(0);
  const std::vector<LayerPlan> plans = plan_layers(net, qparams, cfg);

  // Weights as applied this pass.
  std::vector<TensorR> w_q(net.layers.size());
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    if (!plans[l].weighted) continue;
    const LayerSpec& src = net.layers[l];
    w_q[l] = !plans[l].quantized ? src.weights
             : mode == SimMode::smooth
                 ? clamp_quant(src.weights, plans[l].alpha, qparams[l].n_w)
                 : fake_quant(src.weights, plans[l].alpha, qparams[l].n_w);
  }

  // Direct encoding; the quantized hard path sees the 8-bit fixed-point grid.
  const bool encode_input = mode == SimMode::hard && plans[0].quantized;
  const TensorR act0 = encode_input ? quantize_input_fixed(input).values : input;

  if (cache) {
    cache->mode = mode;
    cache->cfg = cfg;
    cache->layers.assign(net.layers.size(), SimLayerCache{});
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
      SimLayerCache& c = cache->layers[l];
      const LayerSpec& src = net.layers[l];
      c.kind = src.kind;
      c.stride = src.stride;
      c.padding = src.padding;
      c.window = src.window;
      c.pool_stride = src.pool_stride;
      c.weighted = plans[l].weighted;
      c.is_encoder = plans[l].encoder;
      c.is_readout = plans[l].readout;
      c.quantized = plans[l].quantized;
      if (plans[l].quantized) {
        c.n_w = qparams[l].n_w;
        c.n_u = qparams[l].n_u;
      }
      c.alpha = plans[l].alpha;
      c.grid = plans[l].grid;
      c.theta = plans[l].theta;
      if (plans[l].weighted) {
        c.w_raw = src.weights;
        c.w_q = w_q[l];
      }
    }
  }

  std::vector<TensorR> u_float(net.layers.size());
  std::vector<TensorI> u_idx(net.layers.size());
  TensorR acc;

  SimResult res;
  res.record.planes.resize(net.layers.size());
  res.record.lif_layer.assign(net.layers.size(), false);

  for (int t = 0; t < cfg.timesteps; ++t) {
    TensorR act = act0;
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
      const LayerSpec& layer = net.layers[l];
      const LayerPlan& p = plans[l];
      if (layer.kind == LayerKind::pool) {
        if (layer.pool != PoolKind::max)
          throw ValueError("forward_simulated: training path supports max pooling only");
        PoolResult pr = maxpool2d_with_argmax(act, layer.window, layer.pool_stride);
        if (cache) {
          cache->layers[l].pool_in_shape = act.shape();
          cache->layers[l].argmax.push_back(pr.argmax);
        }
        act = std::move(pr.values);
        continue;
      }
      if (cache) cache->layers[l].input.push_back(act);
      TensorR x = layer.kind == LayerKind::conv
                      ? conv2d(act, w_q[l], layer.stride, layer.padding)
                      : linear(flatten2(act), w_q[l]);
      if (cache) cache->layers[l].out_shape = x.shape();
      if (p.readout) {
        if (acc.empty()) acc = TensorR(x.shape());
        acc.flat() += x.flat();
        break;
      }
      if (u_float[l].empty()) {
        u_float[l] = TensorR(x.shape());
        if (p.exact) u_idx[l] = TensorI(x.shape());
      }
      TensorR h = x;
      h.flat() += u_float[l].flat();

      TensorR spikes(h.shape());
      TensorR u_next(h.shape());
      TensorI gate = TensorI::full(h.shape(), 1);
      TensorI plane(h.shape());

      if (mode == SimMode::hard && p.exact) {
        // Integer-grid dynamics: bit-exact mirror of the inference engine.
        TensorI& k_prev = u_idx[l];
        for (Index i = 0; i < h.size(); ++i) {
          const auto k_x = static_cast<std::int64_t>(iround(x[i] / p.grid));
          const std::int64_t k_h = k_x + k_prev[i];
          const bool s = k_h >= p.theta;
          std::int64_t k_next;
          if (s && cfg.reset == ResetMode::hard)
            k_next = 0;
          else if (s)
            k_next = (k_h - p.theta) >> 1;
          else
            k_next = k_h >> 1;
          const std::int64_t k_sat = std::clamp<std::int64_t>(k_next, -p.s_u, p.s_u);
          gate[i] = k_sat == k_next ? 1 : 0;
          k_prev[i] = static_cast<std::int32_t>(k_sat);
          spikes[i] = s ? 1.0 : 0.0;
          plane[i] = s ? 1 : 0;
          u_next[i] = p.grid * static_cast<double>(k_sat);
        }
      } else if (mode == SimMode::hard) {
        for (Index i = 0; i < h.size(); ++i) {
          const bool s = h[i] > cfg.v_th;
          spikes[i] = s ? 1.0 : 0.0;
          plane[i] = s ? 1 : 0;
          double u = cfg.reset == ResetMode::hard ? cfg.tau * h[i] * (s ? 0.0 : 1.0)
                                                  : cfg.tau * (h[i] - (s ? cfg.v_th : 0.0));
          if (p.quantized && p.clamp_state) {
            const double bound = p.grid * static_cast<double>(p.s_u);
            const double clipped = std::clamp(u, -bound, bound);
            gate[i] = clipped == u ? 1 : 0;
            u = clipped;
          }
          u_next[i] = u;
        }
      } else {
        for (Index i = 0; i < h.size(); ++i) {
          const double s = soft_spike((h[i] - cfg.v_th) / cfg.v_th);
          spikes[i] = s;
          plane[i] = s > 0.5 ? 1 : 0;
          double u = cfg.reset == ResetMode::hard ? cfg.tau * h[i] * (1.0 - s)
                                                  : cfg.tau * (h[i] - s * cfg.v_th);
          if (p.quantized && p.clamp_state) {
            const double bound = p.grid * static_cast<double>(p.s_u);
            const double clipped = std::clamp(u, -bound, bound);
            gate[i] = clipped == u ? 1 : 0;
            u = clipped;
          }
          u_next[i] = u;
        }
      }

      u_float[l] = u_next;
      res.record.lif_layer[l] = true;
      res.record.planes[l].push_back(plane);
      if (cache) {
        SimLayerCache& c = cache->layers[l];
        c.h.push_back(std::move(h));
        c.spikes.push_back(spikes);
        c.u_stored.push_back(u_float[l]);
        c.sat_gate.push_back(std::move(gate));
      }
      act = std::move(spikes);
    }
  }

  TensorR logits = acc;
  logits.flat() /= static_cast<double>(cfg.timesteps);
  res.logits = logits.rank() == 2 ? logits : logits.reshaped({batch, logits.size() / batch});
  if (cache) cache->logits = res.logits;
  return res;
}

double cross_entropy(const TensorR& logits, const std::vector<int>& labels, TensorR* grad) {
  const Index n = logits.dim(0), c = logits.dim(1);
  if (static_cast<Index>(labels.size()) != n)
    throw ShapeError("cross_entropy: label count does not match batch");
  double loss = 0.0;
  if (grad) *grad = TensorR(logits.shape());
  for (Index b = 0; b < n; ++b) {
    double m = logits.at2(b, 0);
    for (Index j = 1; j < c; ++j) m = std::max(m, logits.at2(b, j));
    double z = 0.0;
    for (Index j = 0; j < c; ++j) z += std::exp(logits.at2(b, j) - m);
    const double lse = m + std::log(z);
    loss += lse - logits.at2(b, labels[b]);
    if (grad)
      for (Index j = 0; j < c; ++j) {
        const double p = std::exp(logits.at2(b, j) - lse);
        grad->at2(b, j) = (p - (j == labels[b] ? 1.0 : 0.0)) / static_cast<double>(n);
      }
  }
  return loss / static_cast<double>(n);
}

BpttGradients backward_bptt(const SimCache& cache, const std::vector<int>& labels) {
  const LifConfig& cfg = cache.cfg;
  const std::size_t n_layers = cache.layers.size();
  const int timesteps = cfg.timesteps;

  BpttGradients out;
  out.w_grad.resize(n_layers);
  out.alpha_grad.assign(n_layers, 0.0);

  TensorR dlogits;
  out.loss = cross_entropy(cache.logits, labels, &dlogits);

  std::vector<TensorR> dwq(n_layers);
  std::vector<double> dalpha_raw(n_layers, 0.0);
  std::vector<TensorR> delta_u(n_layers);  // dLoss / dU_stored, carried across t
  for (std::size_t l = 0; l < n_layers; ++l)
    if (cache.layers[l].weighted) dwq[l] = TensorR(cache.layers[l].w_q.shape());

  std::size_t readout = 0;
  for (std::size_t l = 0; l < n_layers; ++l)
    if (cache.layers[l].is_readout) readout = l;

  // Accumulates the weight gradient of layer l at timestep t and returns the
  // gradient w.r.t. the layer input.
  auto layer_backward = [&](std::size_t l, const TensorR& delta_x, int t) -> TensorR {
    const SimLayerCache& c = cache.layers[l];
    const TensorR& in_act = c.input[t];
    if (c.kind == LayerKind::conv) {
      dwq[l].flat() +=
          conv2d_grad_kernel(in_act, delta_x, c.w_q.shape(), c.stride, c.padding).flat();
      return conv2d_grad_input(c.w_q, delta_x, in_act.shape(), c.stride, c.padding);
    }
    const TensorR in2 = flatten2(in_act);
    dwq[l].flat() += linear_grad_weights(in2, delta_x).flat();
    return linear_grad_input(c.w_q, delta_x).reshaped(in_act.shape());
  };

  for (int t = timesteps - 1; t >= 0; --t) {
    TensorR delta_act;  // gradient arriving from the layer above at this timestep
    for (std::size_t l = readout + 1; l-- > 0;) {
      const SimLayerCache& c = cache.layers[l];
      if (!c.weighted) {
        delta_act = maxpool2d_backward(delta_act, c.argmax[t], c.pool_in_shape);
        continue;
      }
      if (c.is_readout) {
        TensorR dx = dlogits;
        dx.flat() /= static_cast<double>(timesteps);
        delta_act = layer_backward(l, dx.reshaped(c.out_shape), t);
        continue;
      }

      const TensorR& h = c.h[t];
      const TensorR& s = c.spikes[t];
      const TensorI& gate = c.sat_gate[t];
      const bool carry = !delta_u[l].empty();
      const double delta_sub = c.quantized ? c.grid * static_cast<double>(c.theta) : cfg.v_th;

      TensorR dh(h.shape());
      double dalpha_mem = 0.0;
      for (Index i = 0; i < h.size(); ++i) {
        const double g_u = carry ? delta_u[l][i] : 0.0;
        const double gi = gate[i] ? 1.0 : 0.0;
        double du_dh, du_ds, u_pre;
        if (cfg.reset == ResetMode::hard) {
          du_dh = cfg.tau * (1.0 - s[i]) * gi;
          du_ds = -cfg.tau * h[i] * gi;
          u_pre = h[i] * (1.0 - s[i]);
        } else {
          du_dh = cfg.tau * gi;
          du_ds = -cfg.tau * delta_sub * gi;
          u_pre = h[i] - s[i] * delta_sub;
        }
        const double sigma = surrogate_spike_grad((h[i] - cfg.v_th) / cfg.v_th) / cfg.v_th;
        const double ds_total = delta_act[i] + g_u * du_ds;
        dh[i] = ds_total * sigma + g_u * du_dh;
        if (c.quantized && g_u != 0.0) {
          const double k_next = c.u_stored[t][i] / c.grid;
          dalpha_mem += g_u * (k_next - gi * cfg.tau * u_pre / c.grid);
        }
      }
      if (c.quantized) dalpha_raw[l] += (c.is_encoder ? 1.0 / 255.0 : 1.0) * dalpha_mem;
      delta_u[l] = dh;  // dH/dU_prev = 1
      delta_act = layer_backward(l, dh, t);
    }
  }

  // Fold applied-weight gradients through the straight-through quantizer into
  // master weights and the shared scale.
  for (std::size_t l = 0; l < n_layers; ++l) {
    const SimLayerCache& c = cache.layers[l];
    if (!c.weighted) continue;
    if (!c.quantized) {
      out.w_grad[l] = dwq[l];
      continue;
    }
    const auto s_w = static_cast<double>(qlevels(c.n_w));
    TensorR gw(c.w_raw.shape());
    for (Index i = 0; i < c.w_raw.size(); ++i) {
      const double x = c.w_raw[i] / c.alpha;
      const bool inside = std::abs(x) <= s_w;
      gw[i] = inside ? dwq[l][i] : 0.0;
      const double k = c.w_q[i] / c.alpha;
      dalpha_raw[l] += dwq[l][i] * (k - (inside ? x : 0.0));
    }
    out.w_grad[l] = std::move(gw);
    out.alpha_grad[l] = dalpha_raw[l] * lsq_grad_scale(c.w_raw.size(), c.n_w);
  }
  return out;
}

void TrainConfig::validate() const {
  if (batch_size < 1 || learning_rate <= 0.0 || timesteps < 1 || epochs < 0)
    throw ValueError("TrainConfig: batch, learning rate, timesteps, epochs must be positive");
  if (v_th <= 0.0 || tau <= 0.0 || tau > 1.0) throw ValueError("TrainConfig: bad v_th or tau");
  if (n_w != 0 && (n_w < 2 || n_w > 8 || n_u < 2 || n_u > 8))
    throw ValueError("TrainConfig: quantized bit-widths must lie in [2, 8]");
}

TrainState init_train_state(NetworkSpec net, const TrainConfig& cfg) {
  cfg.validate();
  net.validate();
  TrainState st;
  st.cfg = cfg;
  for (LayerSpec& l : net.layers)
    if (l.weighted() && cfg.quantized() && l.alpha <= 0.0)
      l.alpha = lsq_alpha_init(l.weights, cfg.n_w);
  st.net = std::move(net);
  st.opt.resize(st.net.layers.size());
  for (std::size_t l = 0; l < st.net.layers.size(); ++l)
    if (st.net.layers[l].weighted()) {
      st.opt[l].m = TensorR(st.net.layers[l].weights.shape());
      st.opt[l].v = TensorR(st.net.layers[l].weights.shape());
    }
  return st;
}

namespace {

constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

void adam_update(TrainState& st, const BpttGradients& grads) {
  st.steps += 1;
  const double t = static_cast<double>(st.steps);
  const double bc1 = 1.0 - std::pow(kAdamBeta1, t);
  const double bc2 = 1.0 - std::pow(kAdamBeta2, t);
  const double lr = st.cfg.learning_rate;
  for (std::size_t l = 0; l < st.net.layers.size(); ++l) {
    LayerSpec& layer = st.net.layers[l];
    if (!layer.weighted()) continue;
    AdamParam& p = st.opt[l];
    const TensorR& g = grads.w_grad[l];
    for (Index i = 0; i < g.size(); ++i) {
      p.m[i] = kAdamBeta1 * p.m[i] + (1.0 - kAdamBeta1) * g[i];
      p.v[i] = kAdamBeta2 * p.v[i] + (1.0 - kAdamBeta2) * g[i] * g[i];
      layer.weights[i] -= lr * (p.m[i] / bc1) / (std::sqrt(p.v[i] / bc2) + kAdamEps);
    }
    if (st.cfg.quantized() && layer.alpha > 0.0) {
      const double ga = grads.alpha_grad[l];
      p.m_alpha = kAdamBeta1 * p.m_alpha + (1.0 - kAdamBeta1) * ga;
      p.v_alpha = kAdamBeta2 * p.v_alpha + (1.0 - kAdamBeta2) * ga * ga;
      layer.alpha -= lr * (p.m_alpha / bc1) / (std::sqrt(p.v_alpha / bc2) + kAdamEps);
      layer.alpha = std::max(layer.alpha, kEpsAlpha);  // positivity projection
    }
  }
}

double batch_accuracy(const TensorR& logits, const std::vector<int>& labels) {
  Index hits = 0;
  for (Index b = 0; b < logits.dim(0); ++b) {
    Index best = 0;
    for (Index j = 1; j < logits.dim(1); ++j)
      if (logits.at2(b, j) > logits.at2(b, best)) best = j;
    if (best == labels[b]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(logits.dim(0));
}

}  // namespace

EpochMetrics train_step(TrainState& state, const TensorR& batch, const std::vector<int>& labels) {
  const std::vector<QuantParams> qp =
      state.cfg.quantized() ? make_qparams(state.net, state.cfg.n_w, state.cfg.n_u)
                            : std::vector<QuantParams>{};
  SimCache cache;
  const SimResult fwd =
      forward_simulated(state.net, qp, batch, state.cfg.lif(), SimMode::hard, &cache);
  const BpttGradients grads = backward_bptt(cache, labels);
  if (!std::isfinite(grads.loss))
    throw ValueError("training diverged (non-finite loss) at step " + std::to_string(state.steps));
  adam_update(state, grads);

  EpochMetrics m;
  m.epoch = state.epoch;
  m.loss = grads.loss;
  m.accuracy = batch_accuracy(fwd.logits, labels);
  const std::uint64_t slots = fwd.record.total_slots();
  m.sparsity = slots == 0 ? 1.0
                          : 1.0 - static_cast<double>(fwd.record.total_spikes()) /
                                      static_cast<double>(slots);
  return m;
}

TrainResult train(NetworkSpec net, const LabeledData& data, const TrainConfig& cfg) {
  cfg.validate();
  if (data.size() == 0) throw ValueError("train: empty dataset");
  TrainResult result;
  result.state = init_train_state(std::move(net), cfg);
  TrainState& st = result.state;

  const Index n = data.size();
  std::vector<Index> order(n);
  Rng rng(cfg.seed);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    st.epoch = epoch;
    for (Index i = 0; i < n; ++i) order[i] = i;
    for (Index i = n - 1; i > 0; --i)
      std::swap(order[i], order[rng.uniform_int(0, i)]);

    double loss_sum = 0.0, acc_sum = 0.0, spars_sum = 0.0;
    Index seen = 0;
    for (Index start = 0; start < n; start += cfg.batch_size) {
      const Index bsz = std::min<Index>(cfg.batch_size, n - start);
      TensorR batch({bsz, data.images.dim(1), data.images.dim(2), data.images.dim(3)});
      std::vector<int> labels(bsz);
      const Index sample_len = data.images.size() / data.images.dim(0);
      for (Index b = 0; b < bsz; ++b) {
        const Index src = order[start + b];
        std::copy_n(data.images.data() + src * sample_len, sample_len,
                    batch.data() + b * sample_len);
        labels[b] = data.labels[src];
      }
      const EpochMetrics m = train_step(st, batch, labels);
      loss_sum += m.loss * static_cast<double>(bsz);
      acc_sum += m.accuracy * static_cast<double>(bsz);
      spars_sum += m.sparsity * static_cast<double>(bsz);
      seen += bsz;
    }
    result.metrics.push_back(EpochMetrics{epoch, loss_sum / static_cast<double>(seen),
                                          acc_sum / static_cast<double>(seen),
                                          spars_sum / static_cast<double>(seen)});
  }
  return result;
}

double evaluate_accuracy(const TrainState& state, const LabeledData& data, int batch_size) {
  const Index n = data.size();
  if (n == 0) throw ValueError("evaluate_accuracy: empty dataset");
  const bool quantized = state.cfg.quantized();
  MintNetwork mnet;
  if (quantized)
    mnet = quantize_network(state.net, state.cfg.n_w, state.cfg.n_u, state.cfg.v_th,
                            state.cfg.reset);
  Index hits = 0;
  const Index sample_len = data.images.size() / data.images.dim(0);
  for (Index start = 0; start < n; start += batch_size) {
    const Index bsz = std::min<Index>(batch_size, n - start);
    TensorR batch({bsz, data.images.dim(1), data.images.dim(2), data.images.dim(3)});
    for (Index b = 0; b < bsz; ++b)
      std::copy_n(data.images.data() + (start + b) * sample_len, sample_len,
                  batch.data() + b * sample_len);
    const TensorR logits = quantized
                               ? mint_forward(mnet, batch, state.cfg.timesteps).logits
                               : run_network_float(state.net, batch, state.cfg.lif()).logits;
    for (Index b = 0; b < bsz; ++b) {
      Index best = 0;
      for (Index j = 1; j < logits.dim(1); ++j)
        if (logits.at2(b, j) > logits.at2(b, best)) best = j;
      if (best == data.labels[start + b]) ++hits;
    }
  }
  return static_cast<double>(hits) / static_cast<double>(n);
}

}  // namespace mint
