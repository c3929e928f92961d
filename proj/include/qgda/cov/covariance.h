/*
 * (C) Copyright 2026 The qgda authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include <Eigen/Core>
#include <functional>
#include <span>
#include <vector>

#include "qgda/cov/localization.h"
#include "qgda/cov/obs_operator.h"

namespace qgda::cov {

/// Member mean computed as x_0 + mean(x_i - x_0): identical members give a
/// mean equal to each of them, bit for bit.
std::vector<double> ensemble_mean(std::span<const std::vector<double>> members);

/// Ensemble anomalies about the member mean, stored [state][member] so that
/// covariances between two state entries are contiguous dot products.
class EnsemblePerturbations {
 public:
  explicit EnsemblePerturbations(std::span<const std::vector<double>> members);

  int members() const { return n_members_; }
  int state_size() const { return state_size_; }
  const std::vector<double>& mean() const { return mean_; }
  double anomaly(int a, int i) const { return x_[static_cast<size_t>(a) * n_members_ + i]; }
  /// Sample covariance of entries a and b with the 1/(N-1) normalization.
  double cov(int a, int b) const {
    const double* pa = &x_[static_cast<size_t>(a) * n_members_];
    const double* pb = &x_[static_cast<size_t>(b) * n_members_];
    double s = 0.0;
    for (int i = 0; i < n_members_; ++i) s += pa[i] * pb[i];
    return s / (n_members_ - 1);
  }
  /// True when every anomaly is exactly zero.
  bool collapsed() const;

 private:
  int n_members_ = 0;
  int state_size_ = 0;
  std::vector<double> mean_;
  std::vector<double> x_;
};

/// Covariance patches hold 3 channels of P x P values: Cov(q1(c), q1(c+o)),
/// Cov(q1(c), q2(c+o)), Cov(q2(c), q2(c+o)) for offsets o in [-P/2, P/2)^2,
/// stored channel-major with row P/2+oy and column P/2+ox.
inline constexpr int kPatchChannels = 3;
inline constexpr int kInputChannels = 2;

/// Flat index of offset (ox, oy) within one channel, or -1 outside the patch.
inline int patch_slot(int P, int ox, int oy) {
  const int h = P / 2;
  if (ox < -h || ox >= h || oy < -h || oy >= h) return -1;
  return (oy + h) * P + (ox + h);
}

/// Validates an even patch side no larger than the grid.
void check_patch_size(const GridSpec& grid, int P);

/// Covariance B between two entries of the two-layer state.
class CovarianceSource {
 public:
  virtual ~CovarianceSource() = default;
  virtual const GridSpec& grid() const = 0;
  /// B(x, s) for every state index x, written into out (zero where unknown).
  virtual void column(int s, std::span<double> out) const = 0;
  virtual double entry(int a, int b) const = 0;
};

/// Sample covariance of an ensemble, never materialized as a matrix.
class EnsembleCovariance final : public CovarianceSource {
 public:
  EnsembleCovariance(const GridSpec& grid, const EnsemblePerturbations& pert);
  const GridSpec& grid() const override { return grid_; }
  void column(int s, std::span<double> out) const override;
  double entry(int a, int b) const override { return pert_.cov(a, b); }

 private:
  GridSpec grid_;
  const EnsemblePerturbations& pert_;
};

/// Maps a center gridpoint to its 3 x P x P patch; must stay valid while used.
using PatchProvider = std::function<const double*(int center)>;

/// Covariances read from patches centered on gridpoints. Same-layer entries
/// use the patch at the column point and, for HBH^T, average the estimates of
/// both endpoint patches. A cross-layer entry Cov(q1(a), q2(b)) always comes
/// from the patch centered at a, the only patch that carries that pair.
class PatchCovariance final : public CovarianceSource {
 public:
  PatchCovariance(const GridSpec& grid, int P, PatchProvider provider);
  const GridSpec& grid() const override { return grid_; }
  void column(int s, std::span<double> out) const override;
  double entry(int a, int b) const override;

 private:
  double channel_at(int center, int channel, int to) const;

  GridSpec grid_;
  int P_;
  PatchProvider provider_;
};

/// Gain ingredients B H^T (state x obs) and H B H^T (obs x obs), Schur-localized.
struct GainTerms {
  Eigen::MatrixXd bht;
  Eigen::MatrixXd hbht;
};

/// The one assembly path every method goes through. HBH^T is symmetrized and
/// its diagonal clamped at zero.
GainTerms assemble_gain_terms(const CovarianceSource& source, const LinearObsOperator& h,
                              const Localizer& localizer);

/// Localized ensemble B H^T and H B H^T. Throws for N < 2.
GainTerms ensemble_cov_terms(const GridSpec& grid, const EnsemblePerturbations& pert,
                             const LinearObsOperator& h, const Localizer& localizer);

GainTerms patches_to_gain_terms(const GridSpec& grid, int P, const PatchProvider& provider,
                                const LinearObsOperator& h, const Localizer& localizer);

/// Gridpoints whose patches patches_to_gain_terms will read for this operator.
std::vector<int> required_patch_centers(const GridSpec& grid, int P, const LinearObsOperator& h);

}  // namespace qgda::cov
