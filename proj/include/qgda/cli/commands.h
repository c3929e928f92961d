/*
 * (C) Copyright 2026 The qgda authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qgda/cli/config.h"
#include "qgda/error.h"

namespace qgda::cli {

inline constexpr const char* kCommands[] = {"truth", "observe", "da-run", "extract", "train", "eval-cov", "report"};

struct Invocation {
  std::string command;
  std::optional<std::filesystem::path> config;
  /// Reuses the resolved configuration a previous run recorded for this command.
  std::optional<std::filesystem::path> manifest;
  std::vector<std::pair<std::string, std::string>> overrides;  ///< "section.key", value
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::filesystem::path out = ".";
};

/// Seeds derived from the root seed by name.
struct Seeds {
  std::uint64_t root = 0, truth = 0, obs = 0, da = 0, control = 0, train = 0;
  static Seeds derive(std::uint64_t root);
};

/// Loads and resolves the configuration an invocation describes.
RunConfig load_config(const Invocation& inv);

/// Runs one command, writing artifacts and manifest.json under inv.out.
/// Failures propagate as qgda::Error.
void dispatch(const Invocation& inv, std::ostream& log);

/// 0 success, 1 configuration, 2 numerical, 3 I/O or corruption.
int exit_code(ErrorKind kind);

/// dispatch() with errors reported on `err` and mapped to exit codes.
int run(const Invocation& inv, std::ostream& log, std::ostream& err);

}  // namespace qgda::cli
