#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mint/mint_engine.hpp"
#include "mint/network.hpp"

namespace mint {

//! Parameter and neuron counts of one weighted layer; all the footprint
//! model needs to know about a topology.
struct LayerShape {
  std::string name;
  std::uint64_t params = 0;
  std::uint64_t neurons = 0;
};

struct ArchShape {
  std::string name;
  std::vector<LayerShape> layers;

  std::uint64_t total_params() const;
  std::uint64_t total_neurons() const;
};

//! Named topology descriptors (VGG-9 / VGG-16 for 32x32 and 64x64 inputs) so
//! footprint and cost numbers are computable without trained weights.
const std::vector<ArchShape>& arch_catalog();
ArchShape arch_by_name(const std::string& name);
ArchShape arch_from_network(const NetworkSpec& net, const std::string& name = "custom");

struct FootprintReport {
  std::string arch;
  int n_w = 32;
  int n_u = 32;
  int batch = 1;
  std::uint64_t weight_bytes = 0;
  std::uint64_t membrane_bytes = 0;
  std::uint64_t total_bytes = 0;
  double membrane_share = 0.0;

  static std::string csv_header();
  std::string csv_row() const;
};

//! Memory footprint under a (n_w, n_u, batch) configuration: weight_bytes =
//! sum params * n_w / 8, membrane_bytes = batch * sum neurons * n_u / 8 (one
//! slot per neuron per sample, carried across timesteps). Bit-width 32 means
//! full precision.
FootprintReport footprint(const ArchShape& shape, int n_w, int n_u, int batch);

//! Average spike sparsity: 1 - spikes / (neurons * timesteps * samples).
double sparsity(const SpikeState& record);

enum class Datapath { mint, naive_uq, fixed_point };

Datapath datapath_from_string(const std::string& s);
std::string datapath_name(Datapath d);

enum class UnitKind { add, mul, compare, shift };
enum class UnitDomain { integer, floating };

struct UnitCost {
  double energy = 0.0;
  double area = 0.0;
};

//! Relative energy/area of arithmetic units, seeded with the published 32nm
//! reference rows (8-bit int ADD is the unit). Adder costs scale linearly in
//! bit-width from the 8-bit anchor; the float multiplier interpolates between
//! its 8- and 32-bit anchors. Comparators cost 0.5x and shifters 0.25x the
//! same-width adder; both factors are model assumptions and can be overridden
//! from the cost-table file.
class CostTable {
 public:
  CostTable();  // seeded defaults

  UnitCost lookup(UnitKind kind, UnitDomain domain, int bits) const;

  //! Plain `key = value` file, `#` comments. Keys: int_add8_energy,
  //! float_mul32_area, compare_factor, shift_factor, ...
  static CostTable load(const std::string& path);
  void save(const std::string& path) const;

  double compare_factor = 0.5;
  double shift_factor = 0.25;
  UnitCost int_add8{1.0, 1.0};
  UnitCost float_add8{9.6, 12.7};
  UnitCost int_mul8{10.2, 4.0};
  UnitCost float_mul8{12.2, 5.0};
  UnitCost float_mul32{48.8, 19.3};
};

struct HwUnitEntry {
  std::string unit;
  std::uint64_t count = 0;
  double unit_energy = 0.0;
  double unit_area = 0.0;
};

struct HwCostReport {
  std::string datapath;
  int n_w = 8;
  int n_u = 8;
  int array_size = 1;
  double relative_area = 0.0;
  double relative_dynamic_power = 0.0;  // proportional to per-op energy
  double relative_static_power = 0.0;   // proportional to leakage area
  std::vector<HwUnitEntry> breakdown;

  static std::string csv_header();
  std::string csv_row() const;
};

//! PE-array cost of one datapath flavor. mint: integer adder + comparator +
//! shifter per PE. naive_uq: the same LIF units in the float domain plus one
//! 32-bit float multiplier per PE for the quantization scale. fixed_point:
//! mint-shaped at possibly unequal (n_w, n_u). Totals scale linearly with
//! array_size.
HwCostReport pe_cost(Datapath datapath, int n_w, int n_u, int array_size,
                     const CostTable& table = CostTable());

struct EnergyReport {
  double computation = 0.0;
  double memory = 0.0;
  double total() const { return computation + memory; }
};

//! Sparsity-aware inference energy: synaptic accumulations gated by input
//! spikes cost one add each, LIF bookkeeping costs compare+shift+add per
//! neuron-timestep, and weight/membrane traffic costs bytes_coeff per byte.
//! All terms scale linearly with operand precision.
EnergyReport inference_energy(const MintNetwork& net, const SpikeState& record,
                              const CostTable& table, double bytes_coeff = 1.0);

//! Synaptic accumulation events implied by a spike record (the adds the
//! engine instrumentation would report), computed analytically per layer.
std::vector<std::uint64_t> accumulation_counts(const MintNetwork& net, const SpikeState& record,
                                               Index batch, int timesteps);

}  // namespace mint
