/*
 * (C) Copyright 2026 The qgda authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "qgda/cov/obs_operator.h"

#include <string>

#include "qgda/error.h"
#include "qgda/model/regrid.h"

namespace qgda::cov {

LinearObsOperator::LinearObsOperator(int state_size, std::vector<std::vector<ObsTerm>> rows)
    : state_size_(state_size), rows_(std::move(rows)) {
  for (const auto& r : rows_)
    for (const ObsTerm& t : r)
      if (t.index < 0 || t.index >= state_size_) {
        throw ConfigError("observation operator references state index " + std::to_string(t.index) +
                          " outside [0, " + std::to_string(state_size_) + ")");
      }
}

LinearObsOperator LinearObsOperator::bilinear(const model::GridSpec& grid, std::span<const Location> locations) {
  const int np = grid.points();
  std::vector<std::vector<ObsTerm>> rows;
  rows.reserve(model::kLayers * locations.size());
  for (int l = 0; l < model::kLayers; ++l) {
    for (const Location& loc : locations) {
      const model::BilinearStencil st = model::bilinear_stencil(grid, loc.x, loc.y);
      std::vector<ObsTerm> r;
      for (int k = 0; k < 4; ++k)
        if (st.weight[k] != 0.0) r.push_back({l * np + st.point[k], st.weight[k]});
      rows.push_back(std::move(r));
    }
  }
  return LinearObsOperator(grid.state_size(), std::move(rows));
}

std::vector<double> LinearObsOperator::apply(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != state_size_) {
    throw ConfigError("observation operator applied to a state of size " + std::to_string(x.size()) +
                      ", expected " + std::to_string(state_size_));
  }
  std::vector<double> y(rows_.size(), 0.0);
  for (size_t o = 0; o < rows_.size(); ++o)
    for (const ObsTerm& t : rows_[o]) y[o] += t.weight * x[t.index];
  return y;
}

Eigen::MatrixXd LinearObsOperator::dense() const {
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(size(), state_size_);
  for (int o = 0; o < size(); ++o)
    for (const ObsTerm& t : rows_[o]) h(o, t.index) += t.weight;
  return h;
}

}  // namespace qgda::cov
