/*
 * (C) Copyright 2026 The qgda authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace qgda {

/// Broad failure classes; the command-line tool maps each to an exit code.
enum class ErrorKind { Config, Numerical, Io };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::Config, what) {}
};

/// Blowup, failed factorization, collapsed ensemble.
class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what, std::optional<double> time = std::nullopt)
      : Error(ErrorKind::Numerical, what), time_(time) {}
  /// Model time (seconds) at which the failure was detected, when known.
  std::optional<double> time() const { return time_; }

 private:
  std::optional<double> time_;
};

class IoError : public Error {
 public:
  enum class Code { Open, BadMagic, Version, Truncated, Checksum, Format };
  IoError(Code code, const std::string& what) : Error(ErrorKind::Io, what), code_(code) {}
  Code code() const { return code_; }

 private:
  Code code_;
};

}  // namespace qgda
