#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lossbar {

// Base of every error the library throws on purpose. The CLI maps the
// concrete subclasses to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  DimensionError(std::size_t expected, std::size_t got)
      : Error("dimension mismatch: expected " + std::to_string(expected) + ", got " +
              std::to_string(got)),
        expected_(expected), got_(got) {}
  std::size_t expected() const { return expected_; }
  std::size_t got() const { return got_; }

 private:
  std::size_t expected_;
  std::size_t got_;
};

class NonFiniteError : public Error {
 public:
  using Error::Error;
};

// Input that breaks a documented precondition (bad diagram, bad file, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

class ParseError : public ValidationError {
 public:
  ParseError(const std::string& what, std::size_t line)
      : ValidationError("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class ConfigError : public ValidationError {
 public:
  ConfigError(const std::string& key, const std::string& what)
      : ValidationError("config key '" + key + "': " + what), key_(key) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

// Two points that should span a direction coincide (zero-length chord,
// collapsed tangent plane).
class DegenerateError : public Error {
 public:
  using Error::Error;
};

// Loss or iterate became non-finite during an optimization loop.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, std::size_t step)
      : Error(what + " (step " + std::to_string(step) + ")"), step_(step) {}
  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

}  // namespace lossbar
