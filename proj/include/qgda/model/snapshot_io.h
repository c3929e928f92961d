/*
 * (C) Copyright 2026 The qgda authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace qgda::model {

/// Physical PV of every layer at one time; the on-disk unit of QGST/QGTR files.
struct Snapshot {
  int n = 0;
  int layers = 2;
  double t = 0.0;
  std::vector<double> q;  ///< [layer][iy][ix]
  bool operator==(const Snapshot&) const = default;
};

inline constexpr std::uint32_t kSnapshotVersion = 1;

// QGST record: "QGST", u32 version, u32 n, u32 layers, f64 time, f64 payload.
// A snapshot file is one record plus a u64 FNV-1a checksum. A trajectory file
// is "QGTR", u32 version, u32 count, then `count` QGST records and a checksum.
std::vector<std::byte> encode_snapshot(const Snapshot& s);
Snapshot decode_snapshot(std::vector<std::byte> bytes, const std::string& what = "snapshot");
std::vector<std::byte> encode_trajectory(std::span<const Snapshot> snaps);
std::vector<Snapshot> decode_trajectory(std::vector<std::byte> bytes, const std::string& what = "trajectory");

void write_snapshot(const std::filesystem::path& path, const Snapshot& s);
Snapshot read_snapshot(const std::filesystem::path& path);
void write_trajectory(const std::filesystem::path& path, std::span<const Snapshot> snaps);
std::vector<Snapshot> read_trajectory(const std::filesystem::path& path);

}  // namespace qgda::model
