/*
 * (C) Copyright 2026 The qgda authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "qgda/cov/patches.h"
#include "qgda/unet/net.h"

namespace qgda::unet {

/// Per-channel affine scaling applied to network inputs and targets.
struct Standardization {
  std::vector<double> in_mean, in_std;    ///< one per input channel
  std::vector<double> out_mean, out_std;  ///< one per output channel
  bool operator==(const Standardization&) const = default;
};

/// Channel means and standard deviations over the selected samples; a zero
/// deviation is replaced by 1.
Standardization compute_standardization(const cov::PatchDataset& data, std::span<const std::size_t> samples);

struct Checkpoint {
  NetConfig net;
  int patch = 16;   ///< patch side the network was trained on
  int grid_n = 32;  ///< grid the training patches came from
  Standardization stats;
  std::vector<float> params;
  bool operator==(const Checkpoint&) const = default;
};

// UNWT: "UNWT", u32 version, u32 in/out channels, width, depth, kernel, patch,
// grid n; f64 standardization (in mean, in std, out mean, out std); u64
// parameter count; f32 parameters in parameter_layout order; u64 checksum.
inline constexpr std::uint32_t kCheckpointVersion = 1;
std::vector<std::byte> encode_checkpoint(const Checkpoint& c);
Checkpoint decode_checkpoint(std::vector<std::byte> bytes, const std::string& what = "checkpoint");
void write_checkpoint(const std::filesystem::path& path, const Checkpoint& c);
Checkpoint read_checkpoint(const std::filesystem::path& path);

}  // namespace qgda::unet
