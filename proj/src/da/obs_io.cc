/*
 * (C) Copyright 2026 The qgda authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include <string>

#include "qgda/binary_io.h"
#include "qgda/da/obs.h"

namespace qgda::da {

std::vector<std::byte> encode_observations(std::span<const ObsBatch> batches) {
  io::ByteWriter w;
  w.magic("QGOB");
  w.put<std::uint32_t>(kObsFileVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(batches.size()));
  for (const auto& b : batches) {
    w.put<double>(b.time);
    w.put<double>(b.error_sd[0]);
    w.put<double>(b.error_sd[1]);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(b.locations.size()));
    for (const auto& l : b.locations) {
      w.put<double>(l.x);
      w.put<double>(l.y);
    }
    w.put_array<double>(b.values);
  }
  w.put_checksum();
  return w.bytes();
}

std::vector<ObsBatch> decode_observations(std::vector<std::byte> bytes, const std::string& what) {
  io::ByteReader r(std::move(bytes), what);
  r.expect_magic("QGOB");
  r.expect_version(kObsFileVersion);
  const auto count = r.get<std::uint32_t>();
  std::vector<ObsBatch> out;
  for (std::uint32_t k = 0; k < count; ++k) {
    ObsBatch b;
    b.time = r.get<double>();
    b.error_sd[0] = r.get<double>();
    b.error_sd[1] = r.get<double>();
    const auto m = r.get<std::uint32_t>();
    if (static_cast<std::size_t>(m) * 4 * sizeof(double) > r.remaining()) {
      throw IoError(IoError::Code::Truncated, what + ": batch " + std::to_string(k) + " truncated");
    }
    b.locations.resize(m);
    for (auto& l : b.locations) {
      l.x = r.get<double>();
      l.y = r.get<double>();
    }
    b.values.resize(2 * static_cast<std::size_t>(m));
    r.get_array<double>(b.values);
    out.push_back(std::move(b));
  }
  r.verify_checksum();
  r.expect_end();
  return out;
}

void write_observations(const std::filesystem::path& path, std::span<const ObsBatch> batches) {
  io::write_file(path, encode_observations(batches));
}

std::vector<ObsBatch> read_observations(const std::filesystem::path& path) {
  return decode_observations(io::read_file(path), path.string());
}

}  // namespace qgda::da
