#pragma once

#include <stdexcept>
#include <string>

namespace robustkit {

// Base of every toolkit error.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Operand shapes do not conform for a primitive.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// An index (class label, node id, layer) is out of range.
class IndexError : public Error {
 public:
  using Error::Error;
};

// A documented precondition was violated by the caller.
class ContractError : public Error {
 public:
  using Error::Error;
};

// A non-finite value appeared where finite arithmetic is required.
class NumericError : public Error {
 public:
  using Error::Error;
};

// A file does not follow its declared binary/text layout.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Stored checksum does not match the payload.
class CorruptionError : public FormatError {
 public:
  using FormatError::FormatError;
};

// File was written by an incompatible format version.
class VersionError : public FormatError {
 public:
  using FormatError::FormatError;
};

// User-supplied values failed validation (weights, configs).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Config text could not be parsed; message carries the line number.
class ParseError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

}  // namespace robustkit
