#pragma once

#include <stdexcept>
#include <string>

namespace afrf {

// Failure classes; the CLI maps each to a distinct exit status.
enum class ErrorKind { Parse, Validation, Numeric, Io };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, long line = 0)
      : Error(ErrorKind::Parse,
              line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}

  // 1-based source line, 0 when not tied to a line.
  long line() const noexcept { return line_; }

 private:
  long line_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what)
      : Error(ErrorKind::Validation, what) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what)
      : Error(ErrorKind::Numeric, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::Io, what) {}
};

}  // namespace afrf
