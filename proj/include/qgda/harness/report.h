/*
 * (C) Copyright 2026 The qgda authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include <span>
#include <string>
#include <string_view>

#include "qgda/harness/experiment.h"
#include "qgda/harness/skill.h"

namespace qgda::harness {

/// Long-format series: columns cycle_time (days), layer (1 upper, 2 lower), rmse, spread.
std::string metrics_csv(const ExperimentRecord& rec);
/// Reads the series back into a record (metadata fields left empty).
ExperimentRecord parse_metrics_csv(std::string_view text, const std::string& what = "metrics");

/// One row per run with mean RMSE per layer and a t-test against the first
/// run (the baseline row leaves the test columns empty). An empty set gives
/// the header only.
std::string report_csv(std::span<const ExperimentRecord> runs);

/// P x P grid per channel; missing ratios as NA.
std::string skill_csv(const SkillRatioMap& map, int channel);

}  // namespace qgda::harness
