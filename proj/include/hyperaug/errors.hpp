#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hyperaug {

// Base of every library error. kind() is a short stable identifier used in
// the CLI's machine-readable error line.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string& m) : Error("shape", m) {}
};

class StateError : public Error {
 public:
  explicit StateError(const std::string& m) : Error("state", m) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& m) : Error("numeric", m) {}
};

class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& m)
      : Error("parse", source + ":" + std::to_string(line) + ": " + m), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class DuplicateError : public Error {
 public:
  explicit DuplicateError(const std::string& m) : Error("duplicate", m) {}
};

class LookupError : public Error {
 public:
  explicit LookupError(const std::string& m) : Error("lookup", m) {}
};

class CycleError : public Error {
 public:
  explicit CycleError(const std::string& m) : Error("cycle", m) {}
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& m) : Error("validation", m) {}
};

class StratificationError : public Error {
 public:
  explicit StratificationError(const std::string& m) : Error("stratification", m) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& m) : Error("data", m) {}
};

class DegenerateInputError : public Error {
 public:
  explicit DegenerateInputError(const std::string& m) : Error("degenerate", m) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& m) : Error("io", m) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& m) : Error("config", m) {}
};

}  // namespace hyperaug
