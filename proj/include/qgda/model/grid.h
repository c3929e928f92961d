/*
 * (C) Copyright 2026 The qgda authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include <cmath>

namespace qgda::model {

inline constexpr int kLayers = 2;

/// Square doubly periodic grid. Points sit at (ix*dx, iy*dx); fields are stored
/// row-major with x fastest: index = iy*n + ix.
struct GridSpec {
  int n = 32;
  double length = 1.0e6;

  /// Validates: n a power of two (>= 4), length > 0.
  static GridSpec create(int n, double length = 1.0e6);

  double dx() const { return length / n; }
  int points() const { return n * n; }
  /// Size of a two-layer state vector.
  int state_size() const { return kLayers * n * n; }
  int wrap(int i) const { return ((i % n) + n) % n; }
  int index(int ix, int iy) const { return wrap(iy) * n + wrap(ix); }
  /// Minimum-image signed offset in [-n/2, n/2).
  int offset(int from, int to) const {
    int d = wrap(to - from);
    return d >= n / 2 ? d - n : d;
  }
  bool operator==(const GridSpec&) const = default;
};

/// Minimum-image distance between two gridpoints (flat indices), meters.
inline double periodic_distance(const GridSpec& g, int a, int b) {
  const int ox = g.offset(a % g.n, b % g.n);
  const int oy = g.offset(a / g.n, b / g.n);
  return g.dx() * std::sqrt(double(ox) * ox + double(oy) * oy);
}

/// Minimum-image distance between two positions in meters.
inline double periodic_distance(const GridSpec& g, double x0, double y0, double x1, double y1) {
  auto fold = [&](double d) {
    d = std::fabs(std::remainder(d, g.length));
    return d;
  };
  const double dx = fold(x1 - x0);
  const double dy = fold(y1 - y0);
  return std::sqrt(dx * dx + dy * dy);
}

}  // namespace qgda::model
