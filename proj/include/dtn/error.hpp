#pragma once

#include <stdexcept>
#include <string>

namespace dtn {

// Base of every error the library throws. The CLI maps the concrete type to
// an exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Malformed input record; carries the 1-based line number when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_ = 0;
};

// Internal bookkeeping inconsistency (count tables out of sync with z).
class AuditError : public Error {
 public:
  using Error::Error;
};

}  // namespace dtn
