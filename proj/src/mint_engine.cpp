#include "mint/mint_engine.hpp"

namespace mint {

namespace {

// Spike-gated integer accumulation: conditional adds only, no multiplies.
TensorI spike_conv(const TensorI& s, const TensorI& w, int stride, int padding, OpCounts& c) {
  const Index n = s.dim(0), ci = s.dim(1), h = s.dim(2), wd = s.dim(3);
  const Index co = w.dim(0), kh = w.dim(2), kw = w.dim(3);
  const Index oh = conv_out_dim(h, kh, stride, padding);
  const Index ow = conv_out_dim(wd, kw, stride, padding);
  TensorI out({n, co, oh, ow});
  for (Index b = 0; b < n; ++b)
    for (Index o = 0; o < co; ++o)
      for (Index y = 0; y < oh; ++y)
        for (Index x = 0; x < ow; ++x) {
          std::int32_t acc = 0;
          for (Index i = 0; i < ci; ++i)
            for (Index dy = 0; dy < kh; ++dy) {
              const Index iy = y * stride + dy - padding;
              if (iy < 0 || iy >= h) continue;
              for (Index dx = 0; dx < kw; ++dx) {
                const Index ix = x * stride + dx - padding;
                if (ix < 0 || ix >= wd) continue;
                if (s.at4(b, i, iy, ix) != 0) {
                  acc += w.at4(o, i, dy, dx);
                  ++c.adds;
                }
              }
            }
          out.at4(b, o, y, x) = acc;
        }
  return out;
}

TensorI spike_linear(const TensorI& s, const TensorI& w, OpCounts& c) {
  const Index n = s.dim(0), in = s.dim(1), out_dim = w.dim(0);
  TensorI out({n, out_dim});
  for (Index b = 0; b < n; ++b)
    for (Index o = 0; o < out_dim; ++o) {
      std::int32_t acc = 0;
      for (Index i = 0; i < in; ++i)
        if (s.at2(b, i) != 0) {
          acc += w.at2(o, i);
          ++c.adds;
        }
      out.at2(b, o) = acc;
    }
  return out;
}

// Integer MAC path of the encoder layer; input levels are 0..255.
TensorI mac_conv(const TensorI& p, const TensorI& w, int stride, int padding, OpCounts& c) {
  const Index n = p.dim(0), ci = p.dim(1), h = p.dim(2), wd = p.dim(3);
  const Index co = w.dim(0), kh = w.dim(2), kw = w.dim(3);
  const Index oh = conv_out_dim(h, kh, stride, padding);
  const Index ow = conv_out_dim(wd, kw, stride, padding);
  TensorI out({n, co, oh, ow});
  for (Index b = 0; b < n; ++b)
    for (Index o = 0; o < co; ++o)
      for (Index y = 0; y < oh; ++y)
        for (Index x = 0; x < ow; ++x) {
          std::int32_t acc = 0;
          for (Index i = 0; i < ci; ++i)
            for (Index dy = 0; dy < kh; ++dy) {
              const Index iy = y * stride + dy - padding;
              if (iy < 0 || iy >= h) continue;
              for (Index dx = 0; dx < kw; ++dx) {
                const Index ix = x * stride + dx - padding;
                if (ix < 0 || ix >= wd) continue;
                const std::int32_t v = p.at4(b, i, iy, ix);
                if (v != 0) {
                  acc += v * w.at4(o, i, dy, dx);
                  ++c.multiplies;
                  ++c.adds;
                }
              }
            }
          out.at4(b, o, y, x) = acc;
        }
  return out;
}

TensorI mac_linear(const TensorI& p, const TensorI& w, OpCounts& c) {
  const Index n = p.dim(0), in = p.dim(1), out_dim = w.dim(0);
  TensorI out({n, out_dim});
  for (Index b = 0; b < n; ++b)
    for (Index o = 0; o < out_dim; ++o) {
      std::int32_t acc = 0;
      for (Index i = 0; i < in; ++i) {
        const std::int32_t v = p.at2(b, i);
        if (v != 0) {
          acc += v * w.at2(o, i);
          ++c.multiplies;
          ++c.adds;
        }
      }
      out.at2(b, o) = acc;
    }
  return out;
}

TensorI pool_spikes(const TensorI& s, int window, int stride, OpCounts& c) {
  TensorI out = pool2d(s, window, stride, PoolKind::max);
  c.compares += static_cast<std::uint64_t>(out.size()) *
                static_cast<std::uint64_t>(window * window - 1);
  return out;
}

TensorI accumulate(const MintLayer& layer, const TensorI& act, OpCounts& c) {
  if (layer.kind == LayerKind::conv)
    return layer.is_encoder ? mac_conv(act, layer.w_hat, layer.stride, layer.padding, c)
                            : spike_conv(act, layer.w_hat, layer.stride, layer.padding, c);
  const Index batch = act.dim(0);
  const TensorI flat = act.rank() == 2 ? act : act.reshaped({batch, act.size() / batch});
  return layer.is_encoder ? mac_linear(flat, layer.w_hat, c) : spike_linear(flat, layer.w_hat, c);
}

// Fire, reset, shift-leak, saturate on the integer grid.
MintStepOut fire_reset_leak(const MintLayer& layer, TensorI h, ResetMode reset, OpCounts& c) {
  const std::int32_t theta = layer.qp.theta;
  const int n_u = layer.qp.n_u;
  MintStepOut out{TensorI(h.shape()), TensorI(h.shape())};
  for (Index i = 0; i < h.size(); ++i) {
    ++c.compares;
    if (h[i] >= theta) {
      out.spikes[i] = 1;
      if (reset == ResetMode::hard) {
        out.u_next[i] = 0;
      } else {
        ++c.adds;
        ++c.shifts;
        out.u_next[i] = saturating_cast((h[i] - theta) >> 1, n_u);
      }
    } else {
      out.spikes[i] = 0;
      ++c.shifts;
      out.u_next[i] = saturating_cast(h[i] >> 1, n_u);
    }
  }
  return out;
}

void check_state(const TensorI& u, int n_u) {
  const auto lim = static_cast<std::int32_t>(qlevels(n_u));
  for (Index i = 0; i < u.size(); ++i)
    if (u[i] > lim || u[i] < -lim)
      throw InvariantError("membrane state " + std::to_string(u[i]) + " outside " +
                           std::to_string(n_u) + "-bit range on entry");
}

}  // namespace

MintNetwork quantize_network(const NetworkSpec& net, int n_w, int n_u, double v_th,
                             ResetMode reset) {
  net.validate();
  if (n_w < 2 || n_w > 8 || n_u < 2 || n_u > 8)
    throw ValueError("quantize_network: bit-widths must lie in [2, 8]");
  if (v_th <= 0.0) throw ValueError("quantize_network: v_th must be positive");

  MintNetwork q;
  q.input_shape = net.input_shape;
  q.v_th = v_th;
  q.reset = reset;
  const std::size_t readout = net.last_weighted();
  bool encoder_assigned = false;

  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const LayerSpec& src = net.layers[l];
    MintLayer ml;
    ml.kind = src.kind;
    ml.stride = src.stride;
    ml.padding = src.padding;
    ml.pool = src.pool;
    ml.window = src.window;
    ml.pool_stride = src.pool_stride;
    if (src.kind == LayerKind::pool) {
      if (src.pool != PoolKind::max)
        throw ValueError("quantize_network: integer path supports max pooling only");
      q.layers.push_back(std::move(ml));
      continue;
    }
    const double alpha = src.alpha > 0.0 ? src.alpha : compute_alpha(src.weights, n_w);
    ml.qp.alpha = alpha;
    ml.qp.n_w = n_w;
    ml.qp.n_u = n_u;
    ml.qp.learnable = src.alpha > 0.0;
    ml.is_encoder = !encoder_assigned;
    encoder_assigned = true;
    ml.is_readout = l == readout;
    ml.grid = ml.is_encoder ? alpha / 255.0 : alpha;
    ml.qp.theta = fold_threshold(v_th, ml.grid);
    ml.w_hat = quantize_weights(src.weights, alpha, n_w);
    q.layers.push_back(std::move(ml));
  }
  return q;
}

MintStepOut mint_step(const MintLayer& layer, const TensorI& s_in, const TensorI& u_prev,
                      ResetMode reset, OpCounts* counts) {
  check_state(u_prev, layer.qp.n_u);
  OpCounts local;
  OpCounts& c = counts ? *counts : local;
  TensorI h = accumulate(layer, s_in, c);
  if (!h.same_shape(u_prev))
    throw ShapeError("mint_step: state shape " + shape_str(u_prev.shape()) +
                     " does not match drive " + shape_str(h.shape()));
  for (Index i = 0; i < h.size(); ++i) {
    h[i] += u_prev[i];
    ++c.adds;
  }
  return fire_reset_leak(layer, std::move(h), reset, c);
}

QuantizedInput quantize_input_fixed(const TensorR& input) {
  QuantizedInput q{TensorI(input.shape()), TensorR(input.shape())};
  for (Index i = 0; i < input.size(); ++i) {
    const double clamped = std::clamp(input[i], 0.0, 1.0);
    const auto level = static_cast<std::int32_t>(iround(clamped * 255.0));
    q.levels[i] = level;
    q.values[i] = static_cast<double>(level) / 255.0;
  }
  return q;
}

MintForward mint_forward(const MintNetwork& net, const TensorR& input, int timesteps) {
  if (net.layers.empty()) throw ValueError("mint_forward: empty network");
  if (timesteps < 1) throw ValueError("mint_forward: timesteps must be >= 1");
  for (const MintLayer& l : net.layers)
    if (l.kind != LayerKind::pool && l.w_hat.empty())
      throw ValueError("mint_forward: layer missing quantized weights");
  if (input.rank() != 4) throw ShapeError("mint_forward: input must be NCHW");

  const Index batch = input.dim(0);
  const TensorI levels = quantize_input_fixed(input).levels;

  MintForward fwd;
  fwd.record.planes.resize(net.layers.size());
  fwd.record.lif_layer.assign(net.layers.size(), false);
  fwd.ops.assign(net.layers.size(), OpCounts{});

  MintState state;
  state.potentials.resize(net.layers.size());
  TensorI acc;
  std::size_t readout = 0;
  for (std::size_t l = 0; l < net.layers.size(); ++l)
    if (net.layers[l].is_readout) readout = l;

  for (int t = 0; t < timesteps; ++t) {
    TensorI act = levels;
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
      const MintLayer& layer = net.layers[l];
      OpCounts& c = fwd.ops[l];
      if (layer.kind == LayerKind::pool) {
        act = pool_spikes(act, layer.window, layer.pool_stride, c);
        continue;
      }
      if (layer.is_readout) {
        TensorI x = accumulate(layer, act, c);
        if (acc.empty()) acc = TensorI(x.shape());
        for (Index i = 0; i < x.size(); ++i) {
          acc[i] += x[i];
          ++c.adds;
        }
        break;
      }
      TensorI x = accumulate(layer, act, c);
      if (state.potentials[l].empty()) state.potentials[l] = TensorI(x.shape());
      TensorI& u = state.potentials[l];
      check_state(u, layer.qp.n_u);
      for (Index i = 0; i < x.size(); ++i) {
        x[i] += u[i];
        ++c.adds;
      }
      MintStepOut step = fire_reset_leak(layer, std::move(x), net.reset, c);
      u = std::move(step.u_next);
      fwd.record.lif_layer[l] = true;
      fwd.record.planes[l].push_back(std::move(step.spikes));
      act = fwd.record.planes[l].back();
    }
  }

  const double grid = net.layers[readout].grid;
  TensorR logits(acc.shape());
  for (Index i = 0; i < acc.size(); ++i)
    logits[i] = grid * static_cast<double>(acc[i]) / static_cast<double>(timesteps);
  fwd.logits = logits.rank() == 2 ? logits : logits.reshaped({batch, logits.size() / batch});
  return fwd;
}

}  // namespace mint
