#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace onlp {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Precondition violated: dimension mismatch, invalid parameter, bad index.
class DomainError : public Error {
 public:
  using Error::Error;
};

class SingularMatrix : public Error {
 public:
  using Error::Error;
};

/// The basic Jacobian block is (numerically) singular or the Jacobian is rank
/// deficient, so no basis partition exists at the current point.
class BasisFailure : public Error {
 public:
  using Error::Error;
};

/// Malformed document or wire payload. Carries the byte offset where parsing
/// stopped (0 when unknown) and a JSON-pointer style field path.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t byte_offset, std::string field_path)
      : Error(what + " (offset " + std::to_string(byte_offset) + ", field '" + field_path + "')"),
        byte_offset_(byte_offset),
        field_path_(std::move(field_path)) {}

  std::size_t byte_offset() const noexcept { return byte_offset_; }
  const std::string& field_path() const noexcept { return field_path_; }

 private:
  std::size_t byte_offset_;
  std::string field_path_;
};

}  // namespace onlp
