/*
 * (C) Copyright 2026 The qgda authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "qgda/binary_io.h"

#include <fstream>
#include <iterator>
#include <sstream>

namespace qgda::io {

std::uint64_t fnv1a64(std::span<const std::byte> bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::byte b : bytes) {
    h ^= static_cast<std::uint64_t>(b);
    h *= 0x100000001b3ULL;
  }
  return h;
}

void ByteWriter::magic(std::string_view tag) {
  const auto* p = reinterpret_cast<const std::byte*>(tag.data());
  buf_.insert(buf_.end(), p, p + tag.size());
}

ByteReader::ByteReader(std::vector<std::byte> bytes, std::string what)
    : bytes_(std::move(bytes)), what_(std::move(what)) {}

const std::byte* ByteReader::take(std::size_t n) {
  if (n > remaining()) {
    throw IoError(IoError::Code::Truncated,
                  what_ + ": truncated (needed " + std::to_string(n) + " bytes at offset " +
                      std::to_string(pos_) + ", " + std::to_string(remaining()) + " left)");
  }
  const std::byte* p = bytes_.data() + pos_;
  pos_ += n;
  return p;
}

void ByteReader::expect_magic(std::string_view tag) {
  if (remaining() < tag.size() ||
      std::memcmp(bytes_.data() + pos_, tag.data(), tag.size()) != 0) {
    throw IoError(IoError::Code::BadMagic, what_ + ": bad magic, expected \"" + std::string(tag) + "\"");
  }
  pos_ += tag.size();
}

void ByteReader::expect_version(std::uint32_t expected) {
  const auto found = get<std::uint32_t>();
  if (found != expected) {
    throw IoError(IoError::Code::Version, what_ + ": unsupported format version " + std::to_string(found) +
                                              " (expected " + std::to_string(expected) + ")");
  }
}

void ByteReader::verify_checksum() {
  const std::size_t body = pos_;
  const auto stored = get<std::uint64_t>();
  const auto actual = fnv1a64(std::span(bytes_).first(body));
  if (stored != actual) {
    throw IoError(IoError::Code::Checksum, what_ + ": checksum mismatch");
  }
}

void ByteReader::expect_end() const {
  if (remaining() != 0) {
    throw IoError(IoError::Code::Format,
                  what_ + ": " + std::to_string(remaining()) + " unexpected trailing bytes");
  }
}

std::vector<std::byte> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(IoError::Code::Open, "cannot open " + path.string());
  std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::vector<std::byte> out(raw.size());
  std::memcpy(out.data(), raw.data(), raw.size());
  return out;
}

void write_file(const std::filesystem::path& path, std::span<const std::byte> bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(IoError::Code::Open, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError(IoError::Code::Open, "write failed for " + path.string());
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  write_file(path, std::span(reinterpret_cast<const std::byte*>(text.data()), text.size()));
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(IoError::Code::Open, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace qgda::io
