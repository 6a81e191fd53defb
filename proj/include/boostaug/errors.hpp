#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace boostaug {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file. `line()` is 1-based, 0 when not tied to a line.
class ParseError : public Error {
 public:
  ParseError(const std::string& path, std::size_t line, const std::string& what)
      : Error(path + (line > 0 ? ":" + std::to_string(line) : std::string()) + ": " + what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Invalid configuration or violated precondition on user-supplied settings.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Scorer misbehaviour: protocol violation, timeout, dead child process.
/// `raw()` carries the offending response line when there was one.
class ScorerError : public Error {
 public:
  explicit ScorerError(const std::string& what, std::string raw = {})
      : Error(raw.empty() ? what : what + " (response: " + raw + ")"), raw_(std::move(raw)) {}
  const std::string& raw() const noexcept { return raw_; }

 private:
  std::string raw_;
};

}  // namespace boostaug
