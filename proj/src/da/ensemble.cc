/*
 * (C) Copyright 2026 The qgda authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "qgda/da/ensemble.h"

#include <cmath>

#include "qgda/cov/covariance.h"
#include "qgda/error.h"

namespace qgda::da {

Ensemble::Ensemble(const model::GridSpec& grid, std::vector<std::vector<double>> members)
    : grid_(grid), members_(std::move(members)) {
  if (members_.empty()) throw ConfigError("ensemble needs at least one member");
  for (const auto& m : members_)
    if (static_cast<int>(m.size()) != grid_.state_size()) throw ConfigError("ensemble member size does not match grid");
  refresh();
}

void Ensemble::refresh() { mean_ = cov::ensemble_mean(members_); }

std::array<double, 2> Ensemble::spread() const {
  std::array<double, 2> s{0.0, 0.0};
  if (size() < 2) return s;
  const int np = grid_.points();
  for (const auto& m : members_)
    for (int l = 0; l < 2; ++l)
      for (int p = 0; p < np; ++p) {
        const double d = m[l * np + p] - mean_[l * np + p];
        s[l] += d * d;
      }
  for (double& v : s) v = std::sqrt(v / (static_cast<double>(size() - 1) * np));
  return s;
}

void relax_to_prior(const std::vector<std::vector<double>>& prior, std::vector<std::vector<double>>& posterior,
                    double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("relaxation factor must lie in [0, 1]");
  if (prior.size() != posterior.size()) throw ConfigError("prior and posterior ensembles differ in size");
  for (size_t i = 0; i < prior.size(); ++i) {
    if (prior[i].size() != posterior[i].size()) throw ConfigError("perturbation sizes differ");
    for (size_t a = 0; a < prior[i].size(); ++a)
      posterior[i][a] = (1.0 - alpha) * posterior[i][a] + alpha * prior[i][a];
  }
}

}  // namespace qgda::da
