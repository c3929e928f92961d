/*
 * (C) Copyright 2026 The qgda authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "qgda/cov/covariance.h"
#include "qgda/model/snapshot_io.h"

namespace qgda::cov {

/// Patches for a subset of centers, stored densely in double precision.
class PatchSet {
 public:
  PatchSet(const GridSpec& grid, int P, std::span<const int> centers);

  int patch_side() const { return P_; }
  const GridSpec& grid() const { return grid_; }
  const std::vector<int>& centers() const { return centers_; }
  bool has(int center) const { return slot_[center] >= 0; }
  double* patch(int center);
  const double* patch(int center) const;
  /// Provider view; throws for centers that were not prepared.
  PatchProvider provider() const;

 private:
  GridSpec grid_;
  int P_;
  std::vector<int> centers_;
  std::vector<int> slot_;
  std::vector<double> data_;
};

/// Raw (unlocalized) ensemble covariance patches at the given centers.
PatchSet ensemble_patches(const GridSpec& grid, const EnsemblePerturbations& pert, int P,
                          std::span<const int> centers);

/// Periodic P x P window of a two-layer field around a center, 2 x P x P.
void extract_window(const GridSpec& grid, std::span<const double> field, int center, int P, std::span<float> out);

struct CovPatchSample {
  std::uint64_t cycle = 0;
  std::uint32_t center = 0;
  std::vector<float> input;   ///< 2 x P x P localized ensemble-mean PV
  std::vector<float> output;  ///< 3 x P x P raw covariances
};

/// Training pairs in structure-of-arrays form, single precision.
struct PatchDataset {
  int P = 16;
  std::vector<std::uint64_t> cycle;
  std::vector<std::uint32_t> center;
  std::vector<float> input;
  std::vector<float> output;

  std::size_t size() const { return center.size(); }
  std::size_t input_size() const { return static_cast<std::size_t>(kInputChannels) * P * P; }
  std::size_t output_size() const { return static_cast<std::size_t>(kPatchChannels) * P * P; }
  CovPatchSample at(std::size_t i) const;
  void append(const CovPatchSample& s);
  bool operator==(const PatchDataset&) const = default;
};

/// One sample per gridpoint from a forecast ensemble: the mean-PV window and
/// the raw covariance patch around it. Appended to `out` (whose P is used).
void extract_patch_samples(const GridSpec& grid, const EnsemblePerturbations& pert, std::uint64_t cycle,
                           PatchDataset& out);
/// As above for a subset of centers.
void extract_patch_samples(const GridSpec& grid, const EnsemblePerturbations& pert, std::uint64_t cycle,
                           std::span<const int> centers, PatchDataset& out);

/// Homogeneous background covariance: one 3 x P x P template for every
/// center plus per-layer variance factors.
struct ClimatologicalB {
  int P = 16;
  std::vector<double> templ;
  std::array<double, 2> layer_scale{1.0, 1.0};
  std::uint64_t samples = 0;

  /// Template with the layer factors applied (cross channel by their geometric mean).
  std::vector<double> scaled() const;
};

/// Lagged-difference estimate from a control trajectory with uniform
/// snapshot spacing: d = x(t + window) - x(t) for every available t, second
/// moments averaged over samples and centers.
ClimatologicalB climatological_b(const GridSpec& grid, std::span<const model::Snapshot> trajectory,
                                 double window_s, int P);

// QGPD: "QGPD", u32 version, u32 samples, u32 P, u32 in channels, u32 out
// channels, per sample u64 cycle, u32 center, f32 input, f32 output; u64 checksum.
inline constexpr std::uint32_t kPatchDatasetVersion = 1;
std::vector<std::byte> encode_patch_dataset(const PatchDataset& d);
PatchDataset decode_patch_dataset(std::vector<std::byte> bytes, const std::string& what = "patch dataset");
void write_patch_dataset(const std::filesystem::path& path, const PatchDataset& d);
PatchDataset read_patch_dataset(const std::filesystem::path& path);

// QGCB: "QGCB", u32 version, u32 P, f64 layer scales[2], u64 samples, f64 template; u64 checksum.
std::vector<std::byte> encode_climatological_b(const ClimatologicalB& b);
ClimatologicalB decode_climatological_b(std::vector<std::byte> bytes, const std::string& what = "background");
void write_climatological_b(const std::filesystem::path& path, const ClimatologicalB& b);
ClimatologicalB read_climatological_b(const std::filesystem::path& path);

}  // namespace qgda::cov
