/*
 * (C) Copyright 2026 The qgda authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include <Eigen/Cholesky>
#include <span>
#include <vector>

#include "qgda/cov/covariance.h"

namespace qgda::da {

/// Factorizes R + HBH^T once and maps innovations to increments
/// B H^T (R + HBH^T)^-1 d. B itself is never inverted.
class KalmanSolver {
 public:
  /// Cholesky with one retry after adding 1e-12 * trace / m to the diagonal;
  /// throws NumericalError (with the smallest pivot) if that fails too.
  KalmanSolver(const cov::GainTerms& terms, std::span<const double> r_diag);

  std::vector<double> increment(std::span<const double> innovation) const;
  bool jittered() const { return jittered_; }
  int obs_count() const { return static_cast<int>(r_.size()); }

 private:
  const cov::GainTerms& terms_;
  std::vector<double> r_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  bool jittered_ = false;
};

std::vector<double> oi_increment(const cov::GainTerms& terms, std::span<const double> r_diag,
                                 std::span<const double> innovation);

}  // namespace qgda::da
