#pragma once

#include <stdexcept>
#include <string>

namespace ghosttrack {

/// Malformed input file content. The message carries the path and line.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& path, long line, const std::string& what)
      : std::runtime_error(path + ":" + std::to_string(line) + ": " + what),
        line_(line) {}

  long line() const noexcept { return line_; }

 private:
  long line_;
};

/// File could not be opened, read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical routine hit a degenerate configuration (singular matrix, non-PSD covariance).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ghosttrack
