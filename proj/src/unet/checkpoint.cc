/*
 * (C) Copyright 2026 The qgda authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include <cmath>
#include <string>

#include "qgda/binary_io.h"
#include "qgda/error.h"
#include "qgda/unet/checkpoint.h"

namespace qgda::unet {

Standardization compute_standardization(const cov::PatchDataset& data, std::span<const std::size_t> samples) {
  if (samples.empty()) throw ConfigError("standardization needs at least one sample");
  const int pp = data.P * data.P;
  auto channel_stats = [&](const std::vector<float>& buf, int channels, std::vector<double>& mean,
                           std::vector<double>& sd) {
    mean.assign(channels, 0.0);
    sd.assign(channels, 0.0);
    const std::size_t stride = static_cast<std::size_t>(channels) * pp;
    for (int c = 0; c < channels; ++c) {
      // Two passes in double; patch values are small and float sums lose digits.
      double s = 0.0;
      for (std::size_t i : samples) {
        const float* p = &buf[i * stride + static_cast<std::size_t>(c) * pp];
        for (int k = 0; k < pp; ++k) s += p[k];
      }
      const double count = static_cast<double>(samples.size()) * pp;
      const double m = s / count;
      double ss = 0.0;
      for (std::size_t i : samples) {
        const float* p = &buf[i * stride + static_cast<std::size_t>(c) * pp];
        for (int k = 0; k < pp; ++k) ss += (p[k] - m) * (p[k] - m);
      }
      const double v = std::sqrt(ss / count);
      mean[c] = m;
      sd[c] = v > 0.0 && std::isfinite(v) ? v : 1.0;
    }
  };
  Standardization st;
  channel_stats(data.input, cov::kInputChannels, st.in_mean, st.in_std);
  channel_stats(data.output, cov::kPatchChannels, st.out_mean, st.out_std);
  return st;
}

std::vector<std::byte> encode_checkpoint(const Checkpoint& c) {
  io::ByteWriter w;
  w.magic("UNWT");
  w.put<std::uint32_t>(kCheckpointVersion);
  for (int v : {c.net.in_channels, c.net.out_channels, c.net.width, c.net.depth, c.net.kernel, c.patch, c.grid_n}) {
    w.put<std::uint32_t>(static_cast<std::uint32_t>(v));
  }
  w.put_array<double>(c.stats.in_mean);
  w.put_array<double>(c.stats.in_std);
  w.put_array<double>(c.stats.out_mean);
  w.put_array<double>(c.stats.out_std);
  w.put<std::uint64_t>(c.params.size());
  w.put_array<float>(c.params);
  w.put_checksum();
  return w.bytes();
}

Checkpoint decode_checkpoint(std::vector<std::byte> bytes, const std::string& what) {
  io::ByteReader r(std::move(bytes), what);
  r.expect_magic("UNWT");
  r.expect_version(kCheckpointVersion);
  Checkpoint c;
  int* fields[] = {&c.net.in_channels, &c.net.out_channels, &c.net.width, &c.net.depth,
                   &c.net.kernel,      &c.patch,            &c.grid_n};
  for (int* f : fields) *f = static_cast<int>(r.get<std::uint32_t>());
  try {
    c.net.validate();
    c.net.check_input(c.patch);
  } catch (const ConfigError& e) {
    throw IoError(IoError::Code::Format, what + ": " + e.what());
  }
  if (c.net.in_channels != cov::kInputChannels || c.net.out_channels != cov::kPatchChannels || c.grid_n < 4 ||
      c.grid_n > (1 << 16)) {
    throw IoError(IoError::Code::Format, what + ": unexpected channel counts or grid size");
  }
  auto read_vec = [&](std::vector<double>& v, int n) {
    v.resize(n);
    if (v.size() * sizeof(double) > r.remaining()) throw IoError(IoError::Code::Truncated, what + ": truncated");
    r.get_array<double>(v);
  };
  read_vec(c.stats.in_mean, c.net.in_channels);
  read_vec(c.stats.in_std, c.net.in_channels);
  read_vec(c.stats.out_mean, c.net.out_channels);
  read_vec(c.stats.out_std, c.net.out_channels);
  const auto count = r.get<std::uint64_t>();
  std::size_t expected = 0;
  for (const auto& b : parameter_layout(c.net)) expected += b.size;
  if (count != expected) {
    throw IoError(IoError::Code::Format, what + ": " + std::to_string(count) + " parameters, architecture needs " +
                                             std::to_string(expected));
  }
  if (count * sizeof(float) > r.remaining()) throw IoError(IoError::Code::Truncated, what + ": parameters truncated");
  c.params.resize(count);
  r.get_array<float>(c.params);
  r.verify_checksum();
  r.expect_end();
  return c;
}

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& c) {
  io::write_file(path, encode_checkpoint(c));
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  return decode_checkpoint(io::read_file(path), path.string());
}

}  // namespace qgda::unet
