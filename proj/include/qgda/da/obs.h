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
#include <string>
#include <span>
#include <vector>

#include "qgda/cov/obs_operator.h"
#include "qgda/model/grid.h"
#include "qgda/rng.h"

namespace qgda::da {

using cov::Location;
using model::GridSpec;

struct ObsSpec {
  int count = 50;
  std::array<double, 2> error_sd{1e-5, 5e-7};  ///< upper, lower layer

  void validate() const;
};

/// Observations of both layers at shared locations. Values are layer-major:
/// the upper-layer value at every location, then the lower-layer values.
struct ObsBatch {
  double time = 0.0;
  std::vector<Location> locations;
  std::vector<double> values;
  std::array<double, 2> error_sd{1e-5, 5e-7};

  int size() const { return static_cast<int>(values.size()); }
  /// Diagonal of R, one entry per value.
  std::vector<double> r_diag() const;
  cov::LinearObsOperator op(const GridSpec& grid) const {
    return cov::LinearObsOperator::bilinear(grid, locations);
  }
};

/// Bilinear periodic interpolation of both layers at each location, layer-major.
std::vector<double> apply_H(const GridSpec& grid, std::span<const double> state,
                            std::span<const Location> locations);

/// Uniform random locations and noisy values of the truth.
ObsBatch sample_observations(const GridSpec& truth_grid, std::span<const double> truth, const ObsSpec& spec,
                             Rng& rng, double time = 0.0);

/// A draw from N(0, R) shaped like the batch.
std::vector<double> draw_obs_noise(const ObsBatch& obs, Rng& rng);

// QGOB: "QGOB", u32 version, u32 batch count; per batch f64 time, f64 error
// sd[2], u32 location count, f64 (x, y) per location, f64 values (layer-major);
// u64 checksum.
inline constexpr std::uint32_t kObsFileVersion = 1;
std::vector<std::byte> encode_observations(std::span<const ObsBatch> batches);
std::vector<ObsBatch> decode_observations(std::vector<std::byte> bytes, const std::string& what = "observations");
void write_observations(const std::filesystem::path& path, std::span<const ObsBatch> batches);
std::vector<ObsBatch> read_observations(const std::filesystem::path& path);

}  // namespace qgda::da
