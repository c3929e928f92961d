/*
 * (C) Copyright 2026 The qgda authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include <string>

#include "qgda/binary_io.h"
#include "qgda/cov/patches.h"

namespace qgda::cov {

std::vector<std::byte> encode_patch_dataset(const PatchDataset& d) {
  io::ByteWriter w;
  w.magic("QGPD");
  w.put<std::uint32_t>(kPatchDatasetVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(d.size()));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(d.P));
  w.put<std::uint32_t>(kInputChannels);
  w.put<std::uint32_t>(kPatchChannels);
  const size_t in_sz = d.input_size(), out_sz = d.output_size();
  for (size_t i = 0; i < d.size(); ++i) {
    w.put<std::uint64_t>(d.cycle[i]);
    w.put<std::uint32_t>(d.center[i]);
    w.put_array<float>(std::span<const float>(&d.input[i * in_sz], in_sz));
    w.put_array<float>(std::span<const float>(&d.output[i * out_sz], out_sz));
  }
  w.put_checksum();
  return w.bytes();
}

PatchDataset decode_patch_dataset(std::vector<std::byte> bytes, const std::string& what) {
  io::ByteReader r(std::move(bytes), what);
  r.expect_magic("QGPD");
  r.expect_version(kPatchDatasetVersion);
  const auto count = r.get<std::uint32_t>();
  PatchDataset d;
  d.P = static_cast<int>(r.get<std::uint32_t>());
  const auto in_ch = r.get<std::uint32_t>(), out_ch = r.get<std::uint32_t>();
  if (in_ch != kInputChannels || out_ch != kPatchChannels || d.P <= 0 || d.P % 2 != 0) {
    throw IoError(IoError::Code::Format, what + ": unexpected patch shape (P=" + std::to_string(d.P) +
                                             ", channels " + std::to_string(in_ch) + "/" +
                                             std::to_string(out_ch) + ")");
  }
  const size_t in_sz = d.input_size(), out_sz = d.output_size();
  const size_t record = sizeof(std::uint64_t) + sizeof(std::uint32_t) + (in_sz + out_sz) * sizeof(float);
  if (static_cast<size_t>(count) * record > r.remaining()) {
    throw IoError(IoError::Code::Truncated, what + ": " + std::to_string(count) + " samples declared, file too short");
  }
  d.cycle.resize(count);
  d.center.resize(count);
  d.input.resize(count * in_sz);
  d.output.resize(count * out_sz);
  for (size_t i = 0; i < count; ++i) {
    d.cycle[i] = r.get<std::uint64_t>();
    d.center[i] = r.get<std::uint32_t>();
    r.get_array<float>(std::span<float>(&d.input[i * in_sz], in_sz));
    r.get_array<float>(std::span<float>(&d.output[i * out_sz], out_sz));
  }
  r.verify_checksum();
  r.expect_end();
  return d;
}

void write_patch_dataset(const std::filesystem::path& path, const PatchDataset& d) {
  io::write_file(path, encode_patch_dataset(d));
}

PatchDataset read_patch_dataset(const std::filesystem::path& path) {
  return decode_patch_dataset(io::read_file(path), path.string());
}

inline constexpr std::uint32_t kBackgroundVersion = 1;

std::vector<std::byte> encode_climatological_b(const ClimatologicalB& b) {
  io::ByteWriter w;
  w.magic("QGCB");
  w.put<std::uint32_t>(kBackgroundVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(b.P));
  w.put<double>(b.layer_scale[0]);
  w.put<double>(b.layer_scale[1]);
  w.put<std::uint64_t>(b.samples);
  w.put_array<double>(b.templ);
  w.put_checksum();
  return w.bytes();
}

ClimatologicalB decode_climatological_b(std::vector<std::byte> bytes, const std::string& what) {
  io::ByteReader r(std::move(bytes), what);
  r.expect_magic("QGCB");
  r.expect_version(kBackgroundVersion);
  ClimatologicalB b;
  b.P = static_cast<int>(r.get<std::uint32_t>());
  if (b.P <= 0 || b.P % 2 != 0 || b.P > 4096) {
    throw IoError(IoError::Code::Format, what + ": bad patch side " + std::to_string(b.P));
  }
  b.layer_scale[0] = r.get<double>();
  b.layer_scale[1] = r.get<double>();
  b.samples = r.get<std::uint64_t>();
  b.templ.resize(static_cast<size_t>(kPatchChannels) * b.P * b.P);
  if (b.templ.size() * sizeof(double) > r.remaining()) {
    throw IoError(IoError::Code::Truncated, what + ": template truncated");
  }
  r.get_array<double>(b.templ);
  r.verify_checksum();
  r.expect_end();
  return b;
}

void write_climatological_b(const std::filesystem::path& path, const ClimatologicalB& b) {
  io::write_file(path, encode_climatological_b(b));
}

ClimatologicalB read_climatological_b(const std::filesystem::path& path) {
  return decode_climatological_b(io::read_file(path), path.string());
}

}  // namespace qgda::cov
