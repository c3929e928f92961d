/*
 * (C) Copyright 2026 The qgda authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include <cmath>
#include <limits>

#include "qgda/error.h"
#include "qgda/harness/skill.h"

namespace qgda::harness {

SkillRatioMap cov_skill_ratio(std::span<const float> test, std::span<const float> reference,
                              std::span<const float> climatology, int P) {
  const std::size_t psz = static_cast<std::size_t>(cov::kPatchChannels) * P * P;
  if (P <= 0 || reference.size() % psz != 0 || reference.empty()) {
    throw ConfigError("reference patches do not match patch side " + std::to_string(P));
  }
  if (test.size() != reference.size()) throw ConfigError("test and reference hold different patch counts");
  const bool single = climatology.size() == psz;
  if (!single && climatology.size() != reference.size()) {
    throw ConfigError("climatology must be one patch or one per reference patch");
  }
  const std::size_t count = reference.size() / psz;
  std::vector<double> num(psz, 0.0), den(psz, 0.0);
  for (std::size_t s = 0; s < count; ++s) {
    const float* t = &test[s * psz];
    const float* r = &reference[s * psz];
    const float* c = single ? climatology.data() : &climatology[s * psz];
    for (std::size_t k = 0; k < psz; ++k) {
      const double et = static_cast<double>(t[k]) - r[k], ec = static_cast<double>(c[k]) - r[k];
      num[k] += et * et;
      den[k] += ec * ec;
    }
  }
  SkillRatioMap map;
  map.P = P;
  map.ratio.resize(psz);
  for (std::size_t k = 0; k < psz; ++k) {
    map.ratio[k] = den[k] > 0.0 ? std::sqrt(num[k] / den[k]) : std::numeric_limits<double>::quiet_NaN();
  }
  return map;
}

std::vector<float> mean_patch(const cov::PatchDataset& data) {
  if (data.size() == 0) throw ConfigError("mean patch of an empty dataset");
  const std::size_t psz = data.output_size();
  std::vector<double> acc(psz, 0.0);
  for (std::size_t s = 0; s < data.size(); ++s)
    for (std::size_t k = 0; k < psz; ++k) acc[k] += data.output[s * psz + k];
  std::vector<float> out(psz);
  for (std::size_t k = 0; k < psz; ++k) out[k] = static_cast<float>(acc[k] / static_cast<double>(data.size()));
  return out;
}

}  // namespace qgda::harness
