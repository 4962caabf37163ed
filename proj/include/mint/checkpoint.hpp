#pragma once

#include <cstdint>
#include <string>

#include "mint/mint_engine.hpp"
#include "mint/network.hpp"

namespace mint {

//! On-disk model container. Little-endian fixed layout:
//!   magic "MINT", version u16, flags u16 (bit0 quantized, bit1 soft reset),
//!   timesteps u16, tau shift exponent u16, v_th f64, input shape 3 x u32,
//!   layer count u32, then per layer:
//!     kind u8, n_w u8, n_u u8, pool kind u8,
//!     stride u32, padding u32, window u32, pool_stride u32,
//!     alpha f64, theta i32, weight dims (u32 rank + u32 each),
//!     payload (f64 array for float nets, int8 array for quantized ones),
//!   trailing u32 CRC-32 over everything after magic+version.
struct Checkpoint {
  bool quantized = false;
  int timesteps = 4;
  int tau_shift = 1;  // leak = 2^-tau_shift
  double v_th = 0.5;
  ResetMode reset = ResetMode::hard;
  NetworkSpec float_net;  // valid when !quantized
  MintNetwork mint_net;   // valid when quantized
};

void save_checkpoint(const std::string& path, const NetworkSpec& net, const LifConfig& cfg);
void save_checkpoint(const std::string& path, const MintNetwork& net, int timesteps);

Checkpoint load_checkpoint(const std::string& path);

//! CRC-32 (IEEE 802.3 polynomial, reflected).
std::uint32_t crc32(const unsigned char* data, std::size_t len, std::uint32_t seed = 0);

}  // namespace mint
