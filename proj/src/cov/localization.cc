/*
 * (C) Copyright 2026 The qgda authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "qgda/cov/localization.h"

#include <cmath>
#include <limits>
#include <string>

#include "qgda/error.h"

namespace qgda::cov {

double gaspari_cohn(double d, double c) {
  if (!(c > 0.0)) throw ConfigError("gaspari_cohn: length scale must be positive, got " + std::to_string(c));
  if (d < 0.0) throw ConfigError("gaspari_cohn: negative distance");
  if (std::isinf(c)) return 1.0;
  const double r = d / c;
  if (r >= 2.0) return 0.0;
  const double r2 = r * r, r3 = r2 * r, r4 = r3 * r, r5 = r4 * r;
  if (r <= 1.0) return -0.25 * r5 + 0.5 * r4 + 0.625 * r3 - 5.0 / 3.0 * r2 + 1.0;
  return r5 / 12.0 - 0.5 * r4 + 0.625 * r3 + 5.0 / 3.0 * r2 - 5.0 * r + 4.0 - 2.0 / (3.0 * r);
}

LocalizationSpec LocalizationSpec::create(double radius_m, const GridSpec& grid) {
  if (!(radius_m > 0.0)) {
    throw ConfigError("localization radius must be positive, got " + std::to_string(radius_m));
  }
  return {radius_m, grid};
}

LocalizationSpec LocalizationSpec::none(const GridSpec& grid) {
  return {std::numeric_limits<double>::infinity(), grid};
}

Localizer::Localizer(const LocalizationSpec& spec) : spec_(spec) {
  const GridSpec& g = spec_.grid;
  table_.resize(g.points());
  for (int wy = 0; wy < g.n; ++wy) {
    for (int wx = 0; wx < g.n; ++wx) {
      const double ox = g.offset(0, wx), oy = g.offset(0, wy);
      table_[wy * g.n + wx] = gaspari_cohn(g.dx() * std::sqrt(ox * ox + oy * oy), spec_.radius_m);
    }
  }
}

std::vector<double> Localizer::patch_weights(int P) const {
  std::vector<double> w(P * P);
  for (int py = 0; py < P; ++py)
    for (int px = 0; px < P; ++px) w[py * P + px] = at_offset(px - P / 2, py - P / 2);
  return w;
}

}  // namespace qgda::cov
