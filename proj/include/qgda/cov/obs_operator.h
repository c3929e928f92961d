/*
 * (C) Copyright 2026 The qgda authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include <Eigen/Core>
#include <span>
#include <vector>

#include "qgda/model/grid.h"

namespace qgda::cov {

struct Location {
  double x = 0.0;  ///< meters
  double y = 0.0;
};

/// One nonzero of an observation operator row: state index and weight.
struct ObsTerm {
  int index;
  double weight;
};

/// Sparse linear map from a state vector to observation space.
class LinearObsOperator {
 public:
  LinearObsOperator() = default;
  LinearObsOperator(int state_size, std::vector<std::vector<ObsTerm>> rows);

  /// Bilinear interpolation of both layers at every location. Row order is
  /// layer-major: all upper-layer values, then all lower-layer values.
  static LinearObsOperator bilinear(const model::GridSpec& grid, std::span<const Location> locations);

  int size() const { return static_cast<int>(rows_.size()); }
  int state_size() const { return state_size_; }
  const std::vector<ObsTerm>& row(int o) const { return rows_[o]; }

  std::vector<double> apply(std::span<const double> x) const;
  Eigen::MatrixXd dense() const;

 private:
  int state_size_ = 0;
  std::vector<std::vector<ObsTerm>> rows_;
};

}  // namespace qgda::cov
