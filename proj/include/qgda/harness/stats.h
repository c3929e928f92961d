/*
 * (C) Copyright 2026 The qgda authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include <span>
#include <vector>

namespace qgda::harness {

/// Sample autocorrelation r(0..max_lag) about the series mean.
std::vector<double> autocorrelation(std::span<const double> series, int max_lag);

/// Time at which the autocorrelation first drops below 1/e, linearly
/// interpolated between lags. Throws NumericalError if it never does.
double efolding_time(std::span<const double> series, double dt);

/// Effective degrees of freedom N dt / (2 T_e).
double efolding_dof(std::span<const double> series, double dt);

struct SignificanceResult {
  double mean_diff = 0.0;  ///< mean(a) - mean(b)
  double t = 0.0;
  double dof = 0.0;        ///< smaller of the two adjusted DOFs
  bool significant = false;
};

/// Two-sided two-sample t-test at 95%. Each series' standard error uses its
/// own adjusted DOF as the effective sample size; the t distribution uses the
/// smaller DOF.
SignificanceResult ttest_95(std::span<const double> a, std::span<const double> b, double dt);

}  // namespace qgda::harness
