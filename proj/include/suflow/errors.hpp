#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace suflow {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid user input: configuration text, CLI arguments, parameter ranges.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent checkpoint bytes.
class CheckpointError : public Error {
 public:
  using Error::Error;
};

// Geometry or analysis preconditions violated (cut locus, hemisphere, etc.).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Non-finite values or failed step control during time integration.
class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, std::size_t node = npos)
      : Error(what), node_(node) {}

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
  std::size_t node() const { return node_; }

 private:
  std::size_t node_;
};

}  // namespace suflow
