/*
 * (C) Copyright 2026 The qgda authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qgda/error.h"

namespace qgda::io {

static_assert(std::endian::native == std::endian::little,
              "binary formats are little-endian and written with native stores");

/// FNV-1a over a byte range.
std::uint64_t fnv1a64(std::span<const std::byte> bytes);

class ByteWriter {
 public:
  void magic(std::string_view tag);
  template <typename T>
  void put(T value) {
    static_assert(std::is_arithmetic_v<T>);
    const auto* p = reinterpret_cast<const std::byte*>(&value);
    buf_.insert(buf_.end(), p, p + sizeof(T));
  }
  template <typename T>
  void put_array(std::span<const T> values) {
    static_assert(std::is_arithmetic_v<T>);
    const auto* p = reinterpret_cast<const std::byte*>(values.data());
    buf_.insert(buf_.end(), p, p + values.size_bytes());
  }
  /// Appends the checksum of everything written so far.
  void put_checksum() { put<std::uint64_t>(fnv1a64(buf_)); }
  const std::vector<std::byte>& bytes() const { return buf_; }

 private:
  std::vector<std::byte> buf_;
};

class ByteReader {
 public:
  /// `what` names the file or format in error messages.
  ByteReader(std::vector<std::byte> bytes, std::string what);

  void expect_magic(std::string_view tag);
  /// Reads a u32 version and rejects anything but `expected`.
  void expect_version(std::uint32_t expected);
  template <typename T>
  T get() {
    T value;
    std::memcpy(&value, take(sizeof(T)), sizeof(T));
    return value;
  }
  template <typename T>
  void get_array(std::span<T> out) {
    std::memcpy(out.data(), take(out.size_bytes()), out.size_bytes());
  }
  /// Verifies a trailing u64 checksum over all bytes before it.
  void verify_checksum();
  std::size_t remaining() const { return bytes_.size() - pos_; }
  void expect_end() const;

 private:
  const std::byte* take(std::size_t n);
  std::vector<std::byte> bytes_;
  std::size_t pos_ = 0;
  std::string what_;
};

std::vector<std::byte> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::byte> bytes);
void write_text(const std::filesystem::path& path, std::string_view text);
std::string read_text(const std::filesystem::path& path);

}  // namespace qgda::io
