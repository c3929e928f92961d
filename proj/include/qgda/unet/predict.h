/*
 * (C) Copyright 2026 The qgda authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include <span>
#include <vector>

#include "qgda/da/cycles.h"
#include "qgda/model/regrid.h"
#include "qgda/unet/checkpoint.h"

namespace qgda::unet {

/// Covariance patches from a trained network, evaluated on the grid it was trained on.
class UNetPredictor final : public da::PatchPredictor {
 public:
  explicit UNetPredictor(Checkpoint ckpt);

  int patch_side() const override { return ckpt_.patch; }
  const Checkpoint& checkpoint() const { return ckpt_; }
  cov::PatchSet predict(const model::GridSpec& grid, const cov::EnsemblePerturbations& forecast,
                        std::span<const int> centers) const override;

  /// Patches at `centers` from a two-layer field, using the training windowing.
  cov::PatchSet predict_patches(const model::GridSpec& grid, std::span<const double> field,
                                std::span<const int> centers) const;
  /// Physical-unit windows (count x 2 x P x P) to physical-unit patches (count x 3 x P x P).
  void predict_windows(std::span<const float> windows, int count, std::span<float> patches) const;

 private:
  Checkpoint ckpt_;
  UNet<float> net_;
};

/// A coarse-grid network serving a finer grid: the field is regridded to the
/// training grid, coarse patches are predicted at the coarse center nearest
/// each fine center and resampled bilinearly to fine offsets. The fine patch
/// side covers the same physical extent (P * ratio).
class TransferPredictor final : public da::PatchPredictor {
 public:
  TransferPredictor(Checkpoint coarse, const model::GridSpec& fine_grid,
                    model::RegridMethod method = model::RegridMethod::Bilinear);

  int patch_side() const override { return fine_patch_; }
  cov::PatchSet predict(const model::GridSpec& grid, const cov::EnsemblePerturbations& forecast,
                        std::span<const int> centers) const override;
  cov::PatchSet predict_patches(std::span<const double> fine_field, std::span<const int> fine_centers) const;

  /// The coarse-grid field the network sees.
  std::vector<double> coarse_inputs(std::span<const double> fine_field) const;
  const model::GridSpec& coarse_grid() const { return coarse_; }

 private:
  UNetPredictor native_;
  model::GridSpec fine_, coarse_;
  model::RegridMethod method_;
  int ratio_;
  int fine_patch_;
};

}  // namespace qgda::unet
