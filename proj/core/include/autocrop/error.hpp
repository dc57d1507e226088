#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace autocrop {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A rectangle has zero width or height after canonicalization.
class DegenerateRegionError : public Error {
 public:
  using Error::Error;
};

/// Malformed input bytes. `offset()` is the byte offset (or line number for
/// line-oriented formats) where parsing failed.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : Error(what + " (at " + std::to_string(offset) + ")"), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Invalid hyperparameter, shape mismatch or other contract violation.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class ModelVersionError : public Error {
 public:
  using Error::Error;
};

class ModelSchemaError : public Error {
 public:
  using Error::Error;
};

class ChecksumError : public Error {
 public:
  using Error::Error;
};

}  // namespace autocrop
