/*
 * (C) Copyright 2026 The qgda authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include <array>
#include <span>
#include <string_view>
#include <vector>

#include "qgda/model/grid.h"

namespace qgda::model {

enum class RegridMethod { Bilinear, AreaWeighted, Cubic };

RegridMethod parse_regrid_method(std::string_view name);
std::string_view to_string(RegridMethod method);

/// The four gridpoints (flat indices) and weights of periodic bilinear
/// interpolation at (x, y) meters. Weights sum to one.
struct BilinearStencil {
  std::array<int, 4> point;
  std::array<double, 4> weight;
};
BilinearStencil bilinear_stencil(const GridSpec& grid, double x, double y);

/// Periodic bilinear interpolation of one layer at (x, y) meters.
double sample_bilinear(std::span<const double> layer, const GridSpec& grid, double x, double y);
/// Periodic Catmull-Rom cubic convolution at (x, y) meters.
double sample_cubic(std::span<const double> layer, const GridSpec& grid, double x, double y);

/// Moves a multi-layer field between grids of the same physical extent.
/// AreaWeighted averages the fine cells overlapping each coarse node's cell and
/// is only defined for downscaling by an integer ratio.
std::vector<double> regrid(std::span<const double> field, int layers, const GridSpec& from,
                           const GridSpec& to, RegridMethod method = RegridMethod::Bilinear);

/// Band-limited resampling by truncating or zero-padding the spectrum.
std::vector<double> spectral_resample(std::span<const double> field, int layers, const GridSpec& from,
                                      const GridSpec& to);

}  // namespace qgda::model
