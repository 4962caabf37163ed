#include "mint/network.hpp"

namespace mint {

void NetworkSpec::validate() const {
  if (layers.empty()) throw ValueError("network has no layers");
  if (input_shape.size() != 3) throw ShapeError("network input shape must be {C, H, W}");
  if (!layers.front().weighted()) throw ValueError("network must start with a weighted layer");
  if (!layers.back().weighted()) throw ValueError("network must end with a weighted readout layer");
  activation_shapes(1);  // raises on inconsistent geometry
}

std::size_t NetworkSpec::last_weighted() const {
  for (std::size_t i = layers.size(); i-- > 0;)
    if (layers[i].weighted()) return i;
  throw ValueError("network has no weighted layer");
}

std::vector<Shape> NetworkSpec::activation_shapes(Index batch) const {
  std::vector<Shape> shapes;
  Shape cur = {batch, input_shape[0], input_shape[1], input_shape[2]};
  for (const LayerSpec& l : layers) {
    switch (l.kind) {
      case LayerKind::conv: {
        if (cur.size() != 4) throw ShapeError("conv layer after flattened activation");
        if (l.weights.rank() != 4 || l.weights.dim(1) != cur[1])
          throw ShapeError("conv weights " + shape_str(l.weights.shape()) +
                           " do not match activation " + shape_str(cur));
        cur = {cur[0], l.weights.dim(0), conv_out_dim(cur[2], l.weights.dim(2), l.stride, l.padding),
               conv_out_dim(cur[3], l.weights.dim(3), l.stride, l.padding)};
        if (cur[2] < 1 || cur[3] < 1) throw ShapeError("conv output collapses to zero size");
        break;
      }
      case LayerKind::linear: {
        Index features = 1;
        for (std::size_t i = 1; i < cur.size(); ++i) features *= cur[i];
        if (l.weights.rank() != 2 || l.weights.dim(1) != features)
          throw ShapeError("linear weights " + shape_str(l.weights.shape()) +
                           " do not match flattened activation of " + std::to_string(features));
        cur = {cur[0], l.weights.dim(0)};
        break;
      }
      case LayerKind::pool: {
        if (cur.size() != 4) throw ShapeError("pool layer after flattened activation");
        if (l.window > cur[2] || l.window > cur[3])
          throw ShapeError("pool window larger than activation " + shape_str(cur));
        cur = {cur[0], cur[1], (cur[2] - l.window) / l.pool_stride + 1,
               (cur[3] - l.window) / l.pool_stride + 1};
        break;
      }
    }
    shapes.push_back(cur);
  }
  return shapes;
}

Index NetworkSpec::output_classes() const {
  const Shape out = activation_shapes(1).back();
  Index n = 1;
  for (std::size_t i = 1; i < out.size(); ++i) n *= out[i];
  return n;
}

std::uint64_t SpikeState::total_spikes() const {
  std::uint64_t n = 0;
  for (std::size_t l = 0; l < planes.size(); ++l) {
    if (!lif_layer[l]) continue;
    for (const TensorI& p : planes[l])
      n += static_cast<std::uint64_t>(p.flat().template cast<std::int64_t>().sum());
  }
  return n;
}

std::uint64_t SpikeState::total_slots() const {
  std::uint64_t n = 0;
  for (std::size_t l = 0; l < planes.size(); ++l) {
    if (!lif_layer[l]) continue;
    for (const TensorI& p : planes[l]) n += static_cast<std::uint64_t>(p.size());
  }
  return n;
}

bool spike_records_equal(const SpikeState& a, const SpikeState& b) {
  if (a.planes.size() != b.planes.size()) return false;
  for (std::size_t l = 0; l < a.planes.size(); ++l) {
    if (a.planes[l].size() != b.planes[l].size()) return false;
    for (std::size_t t = 0; t < a.planes[l].size(); ++t)
      if (!tensors_equal(a.planes[l][t], b.planes[l][t])) return false;
  }
  return true;
}

}  // namespace mint
