#include "mint/lif.hpp"

namespace mint {

LifStepOut lif_fire_reset(const TensorR& h, const LifConfig& cfg) {
  cfg.validate();
  LifStepOut out{TensorI(h.shape()), TensorR(h.shape())};
  for (Index i = 0; i < h.size(); ++i) {
    const bool spike = h[i] > cfg.v_th;
    out.spikes[i] = spike ? 1 : 0;
    if (cfg.reset == ResetMode::hard)
      out.u_next[i] = spike ? 0.0 : cfg.tau * h[i];
    else
      out.u_next[i] = cfg.tau * (h[i] - (spike ? cfg.v_th : 0.0));
  }
  return out;
}

LifStepOut lif_step_float(const TensorR& weights, const TensorI& s_in, const TensorR& u_prev,
                          const LifConfig& cfg) {
  TensorR drive = linear(s_in.cast<double>(), weights);
  if (!drive.same_shape(u_prev))
    throw ShapeError("lif_step_float: U_prev shape " + shape_str(u_prev.shape()) +
                     " does not match drive " + shape_str(drive.shape()));
  drive.flat() += u_prev.flat();
  return lif_fire_reset(drive, cfg);
}

NaiveUqOut lif_step_naive_uq(const TensorI& w_hat, const NaiveUqAlphas& alphas,
                             const TensorI& s_in, const TensorR& u_hat_prev, const LifConfig& cfg,
                             UqRounding rounding) {
  cfg.validate();
  if (alphas.a1 <= 0.0 || alphas.a2 <= 0.0 || alphas.a3 <= 0.0)
    throw ValueError("lif_step_naive_uq: scales must be positive");
  const TensorI conv = linear(s_in, w_hat);
  if (u_hat_prev.shape() != conv.shape())
    throw ShapeError("lif_step_naive_uq: U_hat_prev shape mismatch");
  NaiveUqOut out{TensorI(conv.shape()), TensorR(conv.shape())};
  for (Index i = 0; i < conv.size(); ++i) {
    const double h = alphas.a1 * conv[i] + alphas.a2 * u_hat_prev[i];
    const bool spike = h > cfg.v_th;
    out.spikes[i] = spike ? 1 : 0;
    const double next = cfg.tau * h * (spike ? 0.0 : 1.0) / alphas.a3;
    out.u_hat_next[i] =
        rounding == UqRounding::nearest ? static_cast<double>(iround(next)) : next;
  }
  return out;
}

FloatForward run_network_float(const NetworkSpec& net, const TensorR& input, const LifConfig& cfg) {
  net.validate();
  cfg.validate();
  if (input.rank() != 4) throw ShapeError("run_network_float: input must be NCHW");
  const Index batch = input.dim(0);
  const std::vector<Shape> shapes = net.activation_shapes(batch);
  const std::size_t readout = net.last_weighted();

  std::vector<TensorR> membranes(net.layers.size());
  for (std::size_t l = 0; l < net.layers.size(); ++l)
    if (net.layers[l].weighted() && l != readout) membranes[l] = TensorR(shapes[l]);

  TensorR acc(shapes[readout]);
  FloatForward fwd;
  fwd.record.planes.resize(net.layers.size());
  fwd.record.lif_layer.assign(net.layers.size(), false);

  for (int t = 0; t < cfg.timesteps; ++t) {
    TensorR act = input;  // direct encoding: analog input at every timestep
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
      const LayerSpec& layer = net.layers[l];
      if (layer.kind == LayerKind::pool) {
        act = pool2d(act, layer.window, layer.pool_stride, layer.pool);
        continue;
      }
      TensorR drive = layer.kind == LayerKind::conv
                          ? conv2d(act, layer.weights, layer.stride, layer.padding)
                          : linear(act.rank() == 2 ? act : act.reshaped({batch, act.size() / batch}),
                                   layer.weights);
      if (l == readout) {
        acc.flat() += drive.flat();
        break;
      }
      drive.flat() += membranes[l].flat();
      LifStepOut step = lif_fire_reset(drive, cfg);
      membranes[l] = std::move(step.u_next);
      fwd.record.lif_layer[l] = true;
      fwd.record.planes[l].push_back(step.spikes);
      act = step.spikes.cast<double>();
    }
  }

  TensorR logits = acc;
  logits.flat() /= static_cast<double>(cfg.timesteps);
  fwd.logits = logits.rank() == 2 ? logits : logits.reshaped({batch, logits.size() / batch});
  return fwd;
}

}  // namespace mint
