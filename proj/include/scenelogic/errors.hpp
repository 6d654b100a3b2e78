#pragma once

#include <stdexcept>
#include <string>

namespace scenelogic {

/// Input was read but is not acceptable (bad syntax, bad values, bad schema).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A file could not be opened, read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parse failure with a 1-based source location.
class SyntaxError : public ValidationError {
 public:
  SyntaxError(const std::string& message, int line, int column)
      : ValidationError(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
        line_(line),
        column_(column) {}

  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

/// Categorized SYMH decoding failure.
class FormatError : public ValidationError {
 public:
  enum class Code { bad_magic, unsupported_version, bad_dimensions, truncated, trailing_data, nan_value, inf_value, out_of_range };

  FormatError(Code code, const std::string& message) : ValidationError(message), code_(code) {}

  Code code() const { return code_; }

 private:
  Code code_;
};

}  // namespace scenelogic
