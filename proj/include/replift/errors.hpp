#pragma once

#include <stdexcept>
#include <string>

namespace replift {

/// Input that violates an operation's shape or range contract.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Geometry with no well-defined answer (coincident joints, zero spread).
class DegenerateError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Malformed file content. Carries the 1-based line number when known.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::string path = {}, long line = 0)
      : std::runtime_error(format(what, path, line)), path_(std::move(path)), line_(line) {}

  [[nodiscard]] const std::string& path() const { return path_; }
  [[nodiscard]] long line() const { return line_; }

 private:
  static std::string format(const std::string& what, const std::string& path, long line) {
    std::string out;
    if (!path.empty()) out += path + ":";
    if (line > 0) out += std::to_string(line) + ":";
    if (!out.empty()) out += " ";
    return out + what;
  }

  std::string path_;
  long line_ = 0;
};

/// Non-finite loss or parameter during optimisation.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace replift
