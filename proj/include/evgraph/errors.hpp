#pragma once

#include <stdexcept>
#include <string>

namespace evgraph {

// Base for every error raised by the library. The CLI maps the subclasses
// onto exit codes: ConfigError -> 2, DataError family -> 3, anything else -> 4.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent input data.
class DataError : public Error {
 public:
  using Error::Error;
};

class ParseError : public DataError {
 public:
  using DataError::DataError;
};

class IngestError : public DataError {
 public:
  IngestError(std::size_t line, const std::string& what)
      : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class StructureError : public DataError {
 public:
  using DataError::DataError;
};

class NotFoundError : public DataError {
 public:
  enum class Reason { kPage, kIndex, kKind };

  NotFoundError(Reason reason, const std::string& what) : DataError(what), reason_(reason) {}

  Reason reason() const { return reason_; }

 private:
  Reason reason_;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class MissingKeyError : public Error {
 public:
  using Error::Error;
};

}  // namespace evgraph
