/*
 * (C) Copyright 2026 The qgda authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "qgda/da/obs.h"

#include <string>

#include "qgda/error.h"

namespace qgda::da {

void ObsSpec::validate() const {
  if (count < 1) throw ConfigError("observation count must be positive, got " + std::to_string(count));
  for (double sd : error_sd)
    if (!(sd >= 0.0)) throw ConfigError("observation error sd must be >= 0");
}

std::vector<double> ObsBatch::r_diag() const {
  const size_t m = locations.size();
  std::vector<double> r(2 * m);
  for (size_t k = 0; k < m; ++k) {
    r[k] = error_sd[0] * error_sd[0];
    r[m + k] = error_sd[1] * error_sd[1];
  }
  return r;
}

std::vector<double> apply_H(const GridSpec& grid, std::span<const double> state, std::span<const Location> locations) {
  return cov::LinearObsOperator::bilinear(grid, locations).apply(state);
}

ObsBatch sample_observations(const GridSpec& truth_grid, std::span<const double> truth, const ObsSpec& spec, Rng& rng,
                             double time) {
  spec.validate();
  ObsBatch obs;
  obs.time = time;
  obs.error_sd = spec.error_sd;
  std::uniform_real_distribution<double> unif(0.0, truth_grid.length);
  obs.locations.resize(spec.count);
  for (Location& l : obs.locations) {
    l.x = unif(rng);
    l.y = unif(rng);
  }
  obs.values = apply_H(truth_grid, truth, obs.locations);
  const std::vector<double> noise = draw_obs_noise(obs, rng);
  for (int k = 0; k < obs.size(); ++k) obs.values[k] += noise[k];
  return obs;
}

std::vector<double> draw_obs_noise(const ObsBatch& obs, Rng& rng) {
  std::normal_distribution<double> normal;
  const size_t m = obs.locations.size();
  std::vector<double> e(2 * m);
  for (size_t k = 0; k < 2 * m; ++k) e[k] = obs.error_sd[k < m ? 0 : 1] * normal(rng);
  return e;
}

}  // namespace qgda::da
