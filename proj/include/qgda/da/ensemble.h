/*
 * (C) Copyright 2026 The qgda authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include <array>
#include <vector>

#include "qgda/model/grid.h"

namespace qgda::da {

/// Member state vectors with a cached mean. Call refresh() after editing members.
class Ensemble {
 public:
  Ensemble(const model::GridSpec& grid, std::vector<std::vector<double>> members);

  const model::GridSpec& grid() const { return grid_; }
  int size() const { return static_cast<int>(members_.size()); }
  const std::vector<double>& member(int i) const { return members_[i]; }
  std::vector<std::vector<double>>& members() { return members_; }
  const std::vector<std::vector<double>>& members() const { return members_; }
  const std::vector<double>& mean() const { return mean_; }
  /// Per-layer RMS of perturbations about the mean (N-1 normalization; 0 for N = 1).
  std::array<double, 2> spread() const;
  void refresh();

 private:
  model::GridSpec grid_;
  std::vector<std::vector<double>> members_;
  std::vector<double> mean_;
};

/// x'_a <- (1 - alpha) x'_a + alpha x'_b for every member, in place.
void relax_to_prior(const std::vector<std::vector<double>>& prior_perturbations,
                    std::vector<std::vector<double>>& posterior_perturbations, double alpha);

}  // namespace qgda::da
