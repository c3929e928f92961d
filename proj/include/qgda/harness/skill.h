/*
 * (C) Copyright 2026 The qgda authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include <span>
#include <vector>

#include "qgda/cov/patches.h"

namespace qgda::harness {

/// Per channel and offset RMSE ratio, 3 x P x P; NaN where the climatological
/// error is zero.
struct SkillRatioMap {
  int P = 0;
  std::vector<double> ratio;
  double at(int channel, int ox, int oy) const { return ratio[(channel * P + P / 2 + oy) * P + P / 2 + ox]; }
};

/// RMSE(test - reference) / RMSE(climatology - reference) over all patches.
/// `test` and `reference` hold the same number of 3 x P x P patches;
/// `climatology` holds either that many or a single patch used for all.
SkillRatioMap cov_skill_ratio(std::span<const float> test, std::span<const float> reference,
                              std::span<const float> climatology, int P);

/// Mean output patch of a dataset (a homogeneous climatological covariance).
std::vector<float> mean_patch(const cov::PatchDataset& data);

}  // namespace qgda::harness
