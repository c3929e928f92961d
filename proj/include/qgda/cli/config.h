/*
 * (C) Copyright 2026 The qgda authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "qgda/da/cycles.h"
#include "qgda/da/obs.h"
#include "qgda/harness/experiment.h"
#include "qgda/model/regrid.h"
#include "qgda/unet/net.h"
#include "qgda/unet/train.h"

namespace qgda::cli {

/// Resolved values keyed "section.key", in canonical text form.
using ConfigValues = std::map<std::string, std::string>;

/// Typed view of a resolved configuration.
struct RunConfig {
  ConfigValues values;

  model::ModelParams physics;  ///< dt is the 128-point timestep
  int truth_n = 128;
  int da_n = 32;
  double length = 1.0e6;

  da::ObsSpec obs;

  bool control = false;
  da::DAConfig da;  ///< seed left at its default; commands derive it from `seed`
  bool transfer = false;
  model::RegridMethod transfer_regrid = model::RegridMethod::Bilinear;

  unet::NetConfig net;
  int patch = 16;
  unet::TrainConfig train;
  std::filesystem::path dataset;

  std::string name;
  std::uint64_t seed = 1;
  int threads = 1;
  harness::TruthConfig truth;
  int start_day = 0;
  int cycles = 36;
  harness::InitConfig init;
  harness::BackgroundConfig background;
  int extract_stride = 0;
  bool save_forecasts = false;
  std::filesystem::path truth_path, obs_path, forecasts_path, reference_path, climatology_path;
  std::string runs;  ///< comma-separated run directories
};

/// Parses key = value text with [section] headers ("section.key = value" is
/// also accepted outside a section). Unknown keys, type mismatches and
/// constraint violations throw ConfigError naming the key.
ConfigValues parse_config(std::string_view text);

/// Applies overrides ("section.key" -> text) with the same checks.
void apply_override(ConfigValues& values, const std::string& key, const std::string& text);

/// Builds the typed view; relative paths are resolved against `base` and
/// stored back as absolute paths.
RunConfig resolve(ConfigValues values, const std::filesystem::path& base);

/// Canonical config text: every section and key, defaults included.
std::string to_text(const ConfigValues& values);

/// The full default configuration.
ConfigValues default_values();

}  // namespace qgda::cli
