#pragma once

#include <stdexcept>
#include <string>

namespace dsrn {

/// Base of every error thrown by the library. `kind()` is the stable
/// identifier surfaced by the CLI (e.g. "DeltaViolation").
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what);
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

/// Rejected input: parameters, configuration fields, preconditions.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure failed (non-convergence, blow-up, ...).
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace dsrn
