#pragma once

#include <stdexcept>
#include <string>

namespace avgkit {

// Base class for all avgkit failures.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Expression text that does not conform to the grammar. `offset` is the
// 0-based byte position where the problem was detected.
struct ParseError : Error {
  ParseError(std::size_t offset, const std::string& what)
      : Error(what + " (at offset " + std::to_string(offset) + ")"),
        offset(offset) {}
  std::size_t offset;
};

// Arithmetic fault during expression evaluation: division by zero,
// log of a non-positive value, sqrt of a negative value, non-finite result.
struct DomainError : Error {
  using Error::Error;
};

// A numerical procedure failed: trajectory blow-up, no convergence,
// evaluation cost cap exceeded.
struct NumericsError : Error {
  using Error::Error;
};

// Hard resource cap exceeded (expression node limit).
struct ResourceError : Error {
  using Error::Error;
};

}  // namespace avgkit
