#include "mint/equiv.hpp"

#include "mint/mint_engine.hpp"
#include "mint/trainer.hpp"

namespace mint {

RandomNetCase random_net_case(Rng& rng) {
  RandomNetCase c;
  const Index in_ch = rng.uniform_int(1, 2);
  const Index side = rng.uniform_int(5, 8);
  c.net.input_shape = {in_ch, side, side};

  const int n_weighted = static_cast<int>(rng.uniform_int(1, 4));
  const double w_range = rng.uniform(0.3, 1.5);

  Shape cur = {1, in_ch, side, side};
  for (int i = 0; i < n_weighted; ++i) {
    const bool last = i == n_weighted - 1;
    const bool spatial = cur.size() == 4;
    const bool as_conv = !last && spatial && cur[2] >= 3 && rng.uniform() < 0.6;
    if (as_conv) {
      const Index out_ch = rng.uniform_int(2, 6);
      const int pad = static_cast<int>(rng.uniform_int(0, 1));
      TensorR w = rng.uniform_tensor({out_ch, cur[1], 3, 3}, -w_range, w_range);
      c.net.layers.push_back(LayerSpec::conv(std::move(w), 1, pad));
      cur = {1, out_ch, conv_out_dim(cur[2], 3, 1, pad), conv_out_dim(cur[3], 3, 1, pad)};
      if (cur[2] >= 4 && rng.uniform() < 0.4) {
        c.net.layers.push_back(LayerSpec::pooling(PoolKind::max, 2, 2));
        cur = {1, cur[1], (cur[2] - 2) / 2 + 1, (cur[3] - 2) / 2 + 1};
      }
    } else {
      Index features = 1;
      for (std::size_t d = 1; d < cur.size(); ++d) features *= cur[d];
      const Index out = last ? rng.uniform_int(2, 6) : rng.uniform_int(4, 64);
      TensorR w = rng.uniform_tensor({out, features}, -w_range, w_range);
      c.net.layers.push_back(LayerSpec::linear(std::move(w)));
      cur = {1, out};
    }
  }

  c.cfg.v_th = rng.uniform() < 0.7 ? 0.5 : rng.uniform(0.25, 1.0);
  c.cfg.tau = 0.5;
  c.cfg.reset = rng.uniform() < 0.5 ? ResetMode::hard : ResetMode::soft;
  c.cfg.timesteps = static_cast<int>(rng.uniform_int(1, 8));
  const int bits[] = {2, 4, 8};
  c.n_w = c.n_u = bits[rng.uniform_int(0, 2)];
  const Index batch = rng.uniform_int(1, 2);
  c.input = rng.uniform_tensor({batch, in_ch, side, side}, 0.0, 1.0);
  return c;
}

EquivReport run_equivalence_suite(int seeds, std::uint64_t base_seed) {
  EquivReport report;
  Rng rng(base_seed);
  for (int i = 0; i < seeds; ++i) {
    RandomNetCase c = random_net_case(rng);
    const MintNetwork mnet = quantize_network(c.net, c.n_w, c.n_u, c.cfg.v_th, c.cfg.reset);
    const MintForward mint = mint_forward(mnet, c.input, c.cfg.timesteps);
    const SimResult sim = forward_simulated(c.net, make_qparams(c.net, c.n_w, c.n_u), c.input,
                                            c.cfg, SimMode::hard);
    ++report.cases;
    if (!spike_records_equal(mint.record, sim.record)) ++report.spike_mismatches;
    for (std::size_t l = 0; l < mnet.layers.size(); ++l) {
      const MintLayer& layer = mnet.layers[l];
      if (layer.kind == LayerKind::pool || layer.is_encoder) continue;
      ++report.hidden_layers_audited;
      if (mint.ops[l].multiplies != 0) ++report.multiplier_violations;
    }
  }
  return report;
}

}  // namespace mint
