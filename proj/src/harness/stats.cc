/*
 * (C) Copyright 2026 The qgda authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <numeric>
#include <string>

#include "qgda/error.h"
#include "qgda/harness/stats.h"

namespace qgda::harness {

namespace {

double mean_of(std::span<const double> s) {
  return std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(s.size());
}

// Sample variance with N - 1 normalization.
double variance_of(std::span<const double> s, double m) {
  double ss = 0.0;
  for (double v : s) ss += (v - m) * (v - m);
  return ss / static_cast<double>(s.size() - 1);
}

}  // namespace

std::vector<double> autocorrelation(std::span<const double> series, int max_lag) {
  const int n = static_cast<int>(series.size());
  if (n < 3) throw ConfigError("autocorrelation needs at least 3 values, got " + std::to_string(n));
  const double m = mean_of(series);
  double c0 = 0.0;
  for (double v : series) c0 += (v - m) * (v - m);
  if (!(c0 > 0.0)) throw NumericalError("autocorrelation of a constant series is undefined");
  max_lag = std::min(max_lag, n - 1);
  std::vector<double> r(max_lag + 1);
  for (int k = 0; k <= max_lag; ++k) {
    double c = 0.0;
    for (int t = 0; t + k < n; ++t) c += (series[t] - m) * (series[t + k] - m);
    r[k] = c / c0;
  }
  return r;
}

double efolding_time(std::span<const double> series, double dt) {
  if (!(dt > 0.0)) throw ConfigError("time step must be positive");
  const auto r = autocorrelation(series, static_cast<int>(series.size()) - 1);
  const double thresh = std::exp(-1.0);
  for (std::size_t k = 1; k < r.size(); ++k) {
    if (r[k] < thresh) {
      const double frac = (r[k - 1] - thresh) / (r[k - 1] - r[k]);
      return (static_cast<double>(k - 1) + frac) * dt;
    }
  }
  throw NumericalError("autocorrelation never drops below 1/e over " + std::to_string(series.size()) +
                       " values; series too short or trending");
}

double efolding_dof(std::span<const double> series, double dt) {
  const double te = efolding_time(series, dt);
  return static_cast<double>(series.size()) * dt / (2.0 * te);
}

SignificanceResult ttest_95(std::span<const double> a, std::span<const double> b, double dt) {
  SignificanceResult res;
  const double ma = mean_of(a), mb = mean_of(b);
  res.mean_diff = ma - mb;
  // Identical series: no difference to test, and a zero standard error would give 0/0.
  if (a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin())) {
    res.dof = efolding_dof(a, dt);
    return res;
  }
  const double dof_a = efolding_dof(a, dt), dof_b = efolding_dof(b, dt);
  res.dof = std::min(dof_a, dof_b);
  const double se = std::sqrt(variance_of(a, ma) / dof_a + variance_of(b, mb) / dof_b);
  res.t = res.mean_diff / se;
  const boost::math::students_t dist(res.dof);
  const double crit = boost::math::quantile(boost::math::complement(dist, 0.025));
  res.significant = std::fabs(res.t) > crit;
  return res;
}

}  // namespace qgda::harness
