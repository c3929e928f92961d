/*
 * (C) Copyright 2026 The qgda authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "qgda/model/snapshot_io.h"

#include <string>

#include "qgda/binary_io.h"

namespace qgda::model {

namespace {

void put_record(io::ByteWriter& w, const Snapshot& s) {
  w.magic("QGST");
  w.put<std::uint32_t>(kSnapshotVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(s.n));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(s.layers));
  w.put<double>(s.t);
  w.put_array<double>(s.q);
}

Snapshot get_record(io::ByteReader& r) {
  r.expect_magic("QGST");
  r.expect_version(kSnapshotVersion);
  Snapshot s;
  s.n = static_cast<int>(r.get<std::uint32_t>());
  s.layers = static_cast<int>(r.get<std::uint32_t>());
  s.t = r.get<double>();
  const std::size_t count = static_cast<std::size_t>(s.n) * s.n * s.layers;
  if (count * sizeof(double) > r.remaining()) {
    throw IoError(IoError::Code::Truncated, "snapshot payload truncated");
  }
  s.q.resize(count);
  r.get_array<double>(s.q);
  return s;
}

}  // namespace

std::vector<std::byte> encode_snapshot(const Snapshot& s) {
  io::ByteWriter w;
  put_record(w, s);
  w.put_checksum();
  return w.bytes();
}

Snapshot decode_snapshot(std::vector<std::byte> bytes, const std::string& what) {
  io::ByteReader r(std::move(bytes), what);
  Snapshot s = get_record(r);
  r.verify_checksum();
  r.expect_end();
  return s;
}

std::vector<std::byte> encode_trajectory(std::span<const Snapshot> snaps) {
  io::ByteWriter w;
  w.magic("QGTR");
  w.put<std::uint32_t>(kSnapshotVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(snaps.size()));
  for (const Snapshot& s : snaps) put_record(w, s);
  w.put_checksum();
  return w.bytes();
}

std::vector<Snapshot> decode_trajectory(std::vector<std::byte> bytes, const std::string& what) {
  io::ByteReader r(std::move(bytes), what);
  r.expect_magic("QGTR");
  r.expect_version(kSnapshotVersion);
  const auto count = r.get<std::uint32_t>();
  std::vector<Snapshot> out;
  out.reserve(count);
  for (std::uint32_t k = 0; k < count; ++k) out.push_back(get_record(r));
  r.verify_checksum();
  r.expect_end();
  return out;
}

void write_snapshot(const std::filesystem::path& path, const Snapshot& s) {
  io::write_file(path, encode_snapshot(s));
}

Snapshot read_snapshot(const std::filesystem::path& path) {
  return decode_snapshot(io::read_file(path), path.string());
}

void write_trajectory(const std::filesystem::path& path, std::span<const Snapshot> snaps) {
  io::write_file(path, encode_trajectory(snaps));
}

std::vector<Snapshot> read_trajectory(const std::filesystem::path& path) {
  return decode_trajectory(io::read_file(path), path.string());
}

}  // namespace qgda::model
