#include "mint/analyzers.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "mint/csv.hpp"

namespace mint {

std::uint64_t ArchShape::total_params() const {
  std::uint64_t n = 0;
  for (const LayerShape& l : layers) n += l.params;
  return n;
}

std::uint64_t ArchShape::total_neurons() const {
  std::uint64_t n = 0;
  for (const LayerShape& l : layers) n += l.neurons;
  return n;
}

namespace {

struct VggBlock {
  int channels;
  int convs;
  bool pool_after;
};

// Conv blocks followed by optional fully connected stages; 3x3 kernels,
// stride 1, padding 1 throughout, 2x2/2 pooling.
ArchShape make_vgg(const std::string& name, int side, int in_ch,
                   const std::vector<VggBlock>& blocks, const std::vector<int>& fc_dims) {
  ArchShape a;
  a.name = name;
  int ch = in_ch;
  int s = side;
  int conv_idx = 0;
  for (const VggBlock& b : blocks) {
    for (int i = 0; i < b.convs; ++i) {
      LayerShape l;
      l.name = "conv" + std::to_string(++conv_idx);
      l.params = static_cast<std::uint64_t>(ch) * b.channels * 9;
      l.neurons = static_cast<std::uint64_t>(b.channels) * s * s;
      a.layers.push_back(l);
      ch = b.channels;
    }
    if (b.pool_after) s /= 2;
  }
  int features = ch * s * s;
  int fc_idx = 0;
  for (int dim : fc_dims) {
    LayerShape l;
    l.name = "fc" + std::to_string(++fc_idx);
    l.params = static_cast<std::uint64_t>(features) * dim;
    l.neurons = static_cast<std::uint64_t>(dim);
    a.layers.push_back(l);
    features = dim;
  }
  return a;
}

}  // namespace

const std::vector<ArchShape>& arch_catalog() {
  static const std::vector<ArchShape> catalog = {
      make_vgg("vgg9-cifar10", 32, 3,
               {{64, 2, true}, {128, 2, true}, {256, 3, true}}, {1024, 10}),
      make_vgg("vgg16-cifar10", 32, 3,
               {{64, 2, false}, {128, 2, false}, {256, 3, true}, {512, 3, true}, {512, 3, true}},
               {10}),
      make_vgg("vgg16-tinyimagenet", 64, 3,
               {{64, 2, false}, {128, 2, false}, {256, 3, true}, {512, 3, true}, {512, 3, true}},
               {200}),
  };
  return catalog;
}

ArchShape arch_by_name(const std::string& name) {
  for (const ArchShape& a : arch_catalog())
    if (a.name == name) return a;
  std::string known;
  for (const ArchShape& a : arch_catalog()) known += " " + a.name;
  throw ValueError("unknown architecture '" + name + "'; known:" + known);
}

ArchShape arch_from_network(const NetworkSpec& net, const std::string& name) {
  net.validate();
  ArchShape a;
  a.name = name;
  const std::vector<Shape> shapes = net.activation_shapes(1);
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    if (!net.layers[l].weighted()) continue;
    LayerShape s;
    s.name = "layer" + std::to_string(l);
    s.params = static_cast<std::uint64_t>(net.layers[l].weights.size());
    s.neurons = static_cast<std::uint64_t>(shape_count(shapes[l]));
    a.layers.push_back(s);
  }
  return a;
}

FootprintReport footprint(const ArchShape& shape, int n_w, int n_u, int batch) {
  if (batch < 1) throw ValueError("footprint: batch must be >= 1");
  if (n_w < 2 || n_w > 32 || n_u < 2 || n_u > 32)
    throw ValueError("footprint: bit-widths must lie in [2, 32]");
  FootprintReport r;
  r.arch = shape.name;
  r.n_w = n_w;
  r.n_u = n_u;
  r.batch = batch;
  r.weight_bytes = shape.total_params() * static_cast<std::uint64_t>(n_w) / 8;
  r.membrane_bytes = static_cast<std::uint64_t>(batch) * shape.total_neurons() *
                     static_cast<std::uint64_t>(n_u) / 8;
  r.total_bytes = r.weight_bytes + r.membrane_bytes;
  r.membrane_share =
      r.total_bytes == 0 ? 0.0
                         : static_cast<double>(r.membrane_bytes) / static_cast<double>(r.total_bytes);
  return r;
}

std::string FootprintReport::csv_header() {
  return "arch,wbits,ubits,batch,weight_bytes,membrane_bytes,total_bytes,membrane_share";
}

std::string FootprintReport::csv_row() const {
  std::ostringstream os;
  os << arch << ',' << n_w << ',' << n_u << ',' << batch << ',' << weight_bytes << ','
     << membrane_bytes << ',' << total_bytes << ',' << csv_num(membrane_share);
  return os.str();
}

double sparsity(const SpikeState& record) {
  const std::uint64_t slots = record.total_slots();
  if (slots == 0) throw ValueError("sparsity: empty spike record");
  return 1.0 - static_cast<double>(record.total_spikes()) / static_cast<double>(slots);
}

Datapath datapath_from_string(const std::string& s) {
  if (s == "mint") return Datapath::mint;
  if (s == "naive_uq") return Datapath::naive_uq;
  if (s == "fixed_point") return Datapath::fixed_point;
  throw ValueError("unknown datapath '" + s + "' (mint | naive_uq | fixed_point)");
}

std::string datapath_name(Datapath d) {
  switch (d) {
    case Datapath::mint: return "mint";
    case Datapath::naive_uq: return "naive_uq";
    case Datapath::fixed_point: return "fixed_point";
  }
  return "?";
}

CostTable::CostTable() = default;

UnitCost CostTable::lookup(UnitKind kind, UnitDomain domain, int bits) const {
  if (bits < 1) throw ValueError("CostTable: bits must be >= 1");
  const double w = static_cast<double>(bits) / 8.0;
  const bool fp = domain == UnitDomain::floating;
  switch (kind) {
    case UnitKind::add:
      return fp ? UnitCost{float_add8.energy * w, float_add8.area * w}
                : UnitCost{int_add8.energy * w, int_add8.area * w};
    case UnitKind::mul: {
      if (!fp) return UnitCost{int_mul8.energy * w, int_mul8.area * w};
      // interpolate (and extrapolate) along the 8..32-bit float anchors
      const double f = (static_cast<double>(bits) - 8.0) / 24.0;
      return UnitCost{float_mul8.energy + f * (float_mul32.energy - float_mul8.energy),
                      float_mul8.area + f * (float_mul32.area - float_mul8.area)};
    }
    case UnitKind::compare: {
      const UnitCost a = lookup(UnitKind::add, domain, bits);
      return UnitCost{a.energy * compare_factor, a.area * compare_factor};
    }
    case UnitKind::shift: {
      const UnitCost a = lookup(UnitKind::add, domain, bits);
      return UnitCost{a.energy * shift_factor, a.area * shift_factor};
    }
  }
  throw ValueError("CostTable: bad unit kind");
}

CostTable CostTable::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open cost table '" + path + "'");
  CostTable t;
  std::string line;
  int lineno = 0;
  auto set = [&](const std::string& key, double v) {
    if (key == "compare_factor") t.compare_factor = v;
    else if (key == "shift_factor") t.shift_factor = v;
    else if (key == "int_add8_energy") t.int_add8.energy = v;
    else if (key == "int_add8_area") t.int_add8.area = v;
    else if (key == "float_add8_energy") t.float_add8.energy = v;
    else if (key == "float_add8_area") t.float_add8.area = v;
    else if (key == "int_mul8_energy") t.int_mul8.energy = v;
    else if (key == "int_mul8_area") t.int_mul8.area = v;
    else if (key == "float_mul8_energy") t.float_mul8.energy = v;
    else if (key == "float_mul8_area") t.float_mul8.area = v;
    else if (key == "float_mul32_energy") t.float_mul32.energy = v;
    else if (key == "float_mul32_area") t.float_mul32.area = v;
    else throw ValueError("cost table: unknown key '" + key + "'");
  };
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const std::size_t eq = line.find('=');
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (eq == std::string::npos)
      throw ValueError("cost table line " + std::to_string(lineno) + ": expected key = value");
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    set(trim(line.substr(0, eq)), std::stod(trim(line.substr(eq + 1))));
  }
  return t;
}

void CostTable::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write cost table '" + path + "'");
  out << "# relative energy/area of arithmetic units (8-bit int ADD = 1)\n";
  out << "int_add8_energy = " << csv_num(int_add8.energy) << "\n";
  out << "int_add8_area = " << csv_num(int_add8.area) << "\n";
  out << "float_add8_energy = " << csv_num(float_add8.energy) << "\n";
  out << "float_add8_area = " << csv_num(float_add8.area) << "\n";
  out << "int_mul8_energy = " << csv_num(int_mul8.energy) << "\n";
  out << "int_mul8_area = " << csv_num(int_mul8.area) << "\n";
  out << "float_mul8_energy = " << csv_num(float_mul8.energy) << "\n";
  out << "float_mul8_area = " << csv_num(float_mul8.area) << "\n";
  out << "float_mul32_energy = " << csv_num(float_mul32.energy) << "\n";
  out << "float_mul32_area = " << csv_num(float_mul32.area) << "\n";
  out << "compare_factor = " << csv_num(compare_factor) << "\n";
  out << "shift_factor = " << csv_num(shift_factor) << "\n";
}

HwCostReport pe_cost(Datapath datapath, int n_w, int n_u, int array_size, const CostTable& table) {
  if (array_size < 1) throw ValueError("pe_cost: array_size must be >= 1");
  if (n_w < 2 || n_u < 2) throw ValueError("pe_cost: bit-widths must be >= 2");
  HwCostReport r;
  r.datapath = datapath_name(datapath);
  r.n_w = n_w;
  r.n_u = n_u;
  r.array_size = array_size;

  const UnitDomain dom =
      datapath == Datapath::naive_uq ? UnitDomain::floating : UnitDomain::integer;
  const std::string dn = dom == UnitDomain::floating ? "float" : "int";
  const int acc_bits = std::max(n_w, n_u);
  const auto count = static_cast<std::uint64_t>(array_size);

  auto push = [&](const std::string& unit, UnitKind kind, UnitDomain d, int bits) {
    const UnitCost c = table.lookup(kind, d, bits);
    r.breakdown.push_back(HwUnitEntry{unit, count, c.energy, c.area});
  };
  push(dn + "_add" + std::to_string(acc_bits), UnitKind::add, dom, acc_bits);
  push(dn + "_compare" + std::to_string(n_u), UnitKind::compare, dom, n_u);
  push(dn + "_shift" + std::to_string(n_u), UnitKind::shift, dom, n_u);
  if (datapath == Datapath::naive_uq)
    push("float_mul32", UnitKind::mul, UnitDomain::floating, 32);

  for (const HwUnitEntry& e : r.breakdown) {
    r.relative_area += static_cast<double>(e.count) * e.unit_area;
    r.relative_dynamic_power += static_cast<double>(e.count) * e.unit_energy;
    r.relative_static_power += static_cast<double>(e.count) * e.unit_area;
  }
  return r;
}

std::string HwCostReport::csv_header() {
  return "datapath,wbits,ubits,array_size,relative_area,relative_dynamic_power,"
         "relative_static_power";
}

std::string HwCostReport::csv_row() const {
  std::ostringstream os;
  os << datapath << ',' << n_w << ',' << n_u << ',' << array_size << ',' << csv_num(relative_area)
     << ',' << csv_num(relative_dynamic_power) << ',' << csv_num(relative_static_power);
  return os.str();
}

std::vector<std::uint64_t> accumulation_counts(const MintNetwork& net, const SpikeState& record,
                                               Index batch, int timesteps) {
  std::vector<std::uint64_t> counts(net.layers.size(), 0);
  std::vector<TensorI> act;  // spike planes entering the current layer, per t
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const MintLayer& layer = net.layers[l];
    if (layer.kind == LayerKind::pool) {
      for (TensorI& p : act) p = pool2d(p, layer.window, layer.pool_stride, PoolKind::max);
      continue;
    }
    if (layer.is_encoder) {
      // dense analog input: every in-bounds kernel tap fires a MAC
      if (layer.kind == LayerKind::conv) {
        const TensorI ones_in =
            TensorI::full({batch, net.input_shape[0], net.input_shape[1], net.input_shape[2]}, 1);
        const TensorI ones_kernel = TensorI::full(
            {1, layer.w_hat.dim(1), layer.w_hat.dim(2), layer.w_hat.dim(3)}, 1);
        const TensorI taps = conv2d(ones_in, ones_kernel, layer.stride, layer.padding);
        counts[l] = static_cast<std::uint64_t>(taps.flat().cast<std::int64_t>().sum()) *
                    static_cast<std::uint64_t>(layer.w_hat.dim(0)) *
                    static_cast<std::uint64_t>(timesteps);
      } else {
        const std::uint64_t taps = static_cast<std::uint64_t>(layer.w_hat.dim(1)) *
                                   static_cast<std::uint64_t>(batch);
        counts[l] = taps * static_cast<std::uint64_t>(layer.w_hat.dim(0)) *
                    static_cast<std::uint64_t>(timesteps);
      }
    } else if (layer.kind == LayerKind::linear) {
      std::uint64_t spikes = 0;
      for (const TensorI& p : act)
        spikes += static_cast<std::uint64_t>(p.flat().cast<std::int64_t>().sum());
      counts[l] = spikes * static_cast<std::uint64_t>(layer.w_hat.dim(0));
    } else {
      const TensorI ones(Shape{1, act.front().dim(1), layer.w_hat.dim(2), layer.w_hat.dim(3)},
                         TensorI::Flat::Ones(act.front().dim(1) * layer.w_hat.dim(2) *
                                             layer.w_hat.dim(3)));
      std::uint64_t window_spikes = 0;
      for (const TensorI& p : act) {
        const TensorI hits = conv2d(p, ones, layer.stride, layer.padding);
        window_spikes += static_cast<std::uint64_t>(hits.flat().cast<std::int64_t>().sum());
      }
      counts[l] = window_spikes * static_cast<std::uint64_t>(layer.w_hat.dim(0));
    }
    if (!layer.is_readout) act = record.planes[l];
  }
  return counts;
}

EnergyReport inference_energy(const MintNetwork& net, const SpikeState& record,
                              const CostTable& table, double bytes_coeff) {
  if (record.planes.empty()) throw ValueError("inference_energy: empty spike record");
  int timesteps = 0;
  Index batch = 0;
  for (std::size_t l = 0; l < record.planes.size(); ++l)
    if (record.lif_layer[l] && !record.planes[l].empty()) {
      timesteps = static_cast<int>(record.planes[l].size());
      batch = record.planes[l].front().dim(0);
      break;
    }
  if (timesteps == 0) throw ValueError("inference_energy: record holds no LIF planes");

  EnergyReport e;
  const std::vector<std::uint64_t> acc = accumulation_counts(net, record, batch, timesteps);
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const MintLayer& layer = net.layers[l];
    if (layer.kind == LayerKind::pool) continue;
    const int n_w = layer.qp.n_w, n_u = layer.qp.n_u;
    const UnitCost add_w = table.lookup(UnitKind::add, UnitDomain::integer, n_w);
    e.computation += static_cast<double>(acc[l]) * add_w.energy;
    if (layer.is_encoder)
      e.computation += static_cast<double>(acc[l]) *
                       table.lookup(UnitKind::mul, UnitDomain::integer, n_w).energy;
    // weight traffic: streamed once per timestep
    e.memory += bytes_coeff * static_cast<double>(timesteps) *
                static_cast<double>(layer.w_hat.size()) * static_cast<double>(n_w) / 8.0;
    if (!layer.is_readout) {
      // LIF bookkeeping per neuron-timestep: membrane add, compare, shift-leak
      const std::uint64_t nt = record.lif_layer[l] && !record.planes[l].empty()
                                   ? static_cast<std::uint64_t>(record.planes[l].front().size()) *
                                         static_cast<std::uint64_t>(timesteps)
                                   : 0;
      const UnitCost add_u = table.lookup(UnitKind::add, UnitDomain::integer, n_u);
      const UnitCost cmp_u = table.lookup(UnitKind::compare, UnitDomain::integer, n_u);
      const UnitCost shf_u = table.lookup(UnitKind::shift, UnitDomain::integer, n_u);
      e.computation += static_cast<double>(nt) * (add_u.energy + cmp_u.energy + shf_u.energy);
      // membrane traffic: one read and one write per neuron-timestep
      e.memory += bytes_coeff * 2.0 * static_cast<double>(nt) * static_cast<double>(n_u) / 8.0;
    }
  }
  return e;
}

}  // namespace mint
