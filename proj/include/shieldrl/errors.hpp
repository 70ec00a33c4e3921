#pragma once

#include <stdexcept>
#include <string>

namespace shieldrl {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed specification text; carries the offending character offset.
struct SyntaxError : Error {
  SyntaxError(const std::string& msg, std::size_t pos)
      : Error(msg + " (at position " + std::to_string(pos) + ")"),
        position(pos) {}
  std::size_t position;
};

// Well-formed text with impossible semantics (e.g. hold longer than window).
struct SemanticError : Error {
  using Error::Error;
};

struct SpecError : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

struct UnknownSymbol : Error {
  using Error::Error;
};

struct AlphabetMismatch : Error {
  using Error::Error;
};

struct NoSuchAction : Error {
  using Error::Error;
};

struct DomainError : Error {
  using Error::Error;
};

struct NoViablePath : Error {
  using Error::Error;
};

struct AssumptionViolation : Error {
  using Error::Error;
};

struct ShieldViolation : Error {
  using Error::Error;
};

}  // namespace shieldrl
