/*
 * (C) Copyright 2026 The qgda authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include <span>
#include <vector>

#include "qgda/model/grid.h"

namespace qgda::cov {

using model::GridSpec;

/// Gaspari-Cohn fifth-order compactly supported correlation. Reaches zero at
/// d = 2c. An infinite c gives 1 everywhere (no localization).
double gaspari_cohn(double d, double c);

struct LocalizationSpec {
  double radius_m = 100e3;  ///< GC length scale c
  GridSpec grid;

  /// Validates radius_m > 0 (infinity allowed).
  static LocalizationSpec create(double radius_m, const GridSpec& grid);
  static LocalizationSpec none(const GridSpec& grid);
};

/// Pairwise Schur weights W(i, j) between gridpoints. Weights depend only on
/// the minimum-image offset, so they are tabulated once per grid.
class Localizer {
 public:
  explicit Localizer(const LocalizationSpec& spec);

  const LocalizationSpec& spec() const { return spec_; }
  const GridSpec& grid() const { return spec_.grid; }

  /// Weight for a signed offset in gridpoints (any integers; wrapped).
  double at_offset(int ox, int oy) const {
    const int n = spec_.grid.n;
    return table_[spec_.grid.wrap(oy) * n + spec_.grid.wrap(ox)];
  }
  /// Weight between two gridpoints given as flat point indices.
  double operator()(int i, int j) const {
    const int n = spec_.grid.n;
    return at_offset(j % n - i % n, j / n - i / n);
  }
  /// P x P weights laid out like a covariance patch channel: row P/2+oy,
  /// column P/2+ox. Identical for every center.
  std::vector<double> patch_weights(int P) const;

 private:
  LocalizationSpec spec_;
  std::vector<double> table_;  // indexed by wrapped offset
};

}  // namespace qgda::cov
