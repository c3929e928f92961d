/*
 * (C) Copyright 2026 The qgda authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "qgda/da/kalman.h"

#include <Eigen/Dense>
#include <sstream>

#include "qgda/error.h"

namespace qgda::da {

KalmanSolver::KalmanSolver(const cov::GainTerms& terms, std::span<const double> r_diag)
    : terms_(terms), r_(r_diag.begin(), r_diag.end()) {
  const int m = static_cast<int>(r_.size());
  if (terms.hbht.rows() != m || terms.hbht.cols() != m || terms.bht.cols() != m) {
    throw ConfigError("gain terms do not match the observation count");
  }
  if (m == 0) return;
  Eigen::MatrixXd a = terms.hbht;
  for (int k = 0; k < m; ++k) a(k, k) += r_[k];
  llt_.compute(a);
  if (llt_.info() == Eigen::Success) return;
  const double jitter = 1e-12 * a.trace() / m;
  a.diagonal().array() += jitter;
  llt_.compute(a);
  jittered_ = true;
  if (llt_.info() == Eigen::Success) return;
  const double min_pivot = Eigen::LDLT<Eigen::MatrixXd>(a).vectorD().minCoeff();
  std::ostringstream msg;
  msg << "R + HBH^T is not positive definite even after jitter " << jitter << " (minimum pivot " << min_pivot
      << "); the covariance assembly is not PSD";
  throw NumericalError(msg.str());
}

std::vector<double> KalmanSolver::increment(std::span<const double> innovation) const {
  const int m = obs_count();
  if (static_cast<int>(innovation.size()) != m) throw ConfigError("innovation size does not match observations");
  std::vector<double> dx(terms_.bht.rows(), 0.0);
  if (m == 0) return dx;
  const Eigen::VectorXd z = llt_.solve(Eigen::Map<const Eigen::VectorXd>(innovation.data(), m));
  Eigen::Map<Eigen::VectorXd>(dx.data(), dx.size()) = terms_.bht * z;
  return dx;
}

std::vector<double> oi_increment(const cov::GainTerms& terms, std::span<const double> r_diag,
                                 std::span<const double> innovation) {
  return KalmanSolver(terms, r_diag).increment(innovation);
}

}  // namespace qgda::da
