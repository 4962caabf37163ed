#pragma once

#include <string>

#include "mint/trainer.hpp"

namespace mint {

//! Load a labeled dataset. Accepted forms:
//!   "synthetic:classes=4,dim=16,n=10000,seed=7[,noise=0.25]"
//!     deterministic class-template blobs, 1 x dim x dim images in [0, 1]
//!   "<images.idx>,<labels.idx>"
//!     IDX pair (big-endian headers, u8 payload); pixels normalized to [0, 1]
LabeledData load_dataset(const std::string& spec);

//! Deterministic synthetic set: per-class smoothed random template plus
//! pixel noise, clamped to [0, 1].
LabeledData synthetic_dataset(int classes, int dim, int n, std::uint64_t seed,
                              double noise = 0.25);

//! IDX helpers (magic 0x00000803 for u8 image stacks, 0x00000801 for labels).
LabeledData load_idx_pair(const std::string& images_path, const std::string& labels_path);
void save_idx_pair(const std::string& images_path, const std::string& labels_path,
                   const LabeledData& data);

}  // namespace mint
