/*
 * (C) Copyright 2026 The qgda authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace qgda {

/// splitmix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t hash_tag(std::string_view tag) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Named seed derivation: derive_seed(root, "member", cycle, i).
constexpr std::uint64_t derive_seed(std::uint64_t root, std::string_view tag, std::uint64_t a = 0,
                                    std::uint64_t b = 0) {
  return mix64(mix64(mix64(root ^ hash_tag(tag)) + a) + b);
}

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t root, std::string_view tag, std::uint64_t a = 0, std::uint64_t b = 0) {
  return Rng(derive_seed(root, tag, a, b));
}

}  // namespace qgda
