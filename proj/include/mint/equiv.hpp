#pragma once

#include <cstdint>
#include <string>

#include "mint/network.hpp"
#include "mint/rng.hpp"

namespace mint {

//! Random feed-forward topology (conv / pool / linear stages, hard or soft
//! reset, varying v_th and T) for cross-engine consistency checks.
struct RandomNetCase {
  NetworkSpec net;
  LifConfig cfg;
  int n_w = 8;
  int n_u = 8;
  TensorR input;
};

RandomNetCase random_net_case(Rng& rng);

struct EquivReport {
  int cases = 0;
  int spike_mismatches = 0;       // networks whose spike trains diverged
  int multiplier_violations = 0;  // hidden layers reporting runtime multiplies
  std::uint64_t hidden_layers_audited = 0;

  bool clean() const { return spike_mismatches == 0 && multiplier_violations == 0; }
};

//! Run `seeds` random networks through the integer engine and the
//! simulated-quantization forward and compare spike trains bit-for-bit;
//! also audits the engine op counters for hidden-layer multiplies.
EquivReport run_equivalence_suite(int seeds, std::uint64_t base_seed = 2024);

}  // namespace mint
