#pragma once

#include <stdexcept>
#include <string>

namespace outcomes {

/// A value violated a type invariant (non-Hermitian input, effects not summing to identity, ...).
class InvariantError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Arguments are individually valid but outside an operation's domain (n > m, index out of range, ...).
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// The conic solver could not produce a solution meeting the requested tolerance.
class SolverError : public std::runtime_error {
public:
  SolverError(const std::string& what, std::string diagnostics)
      : std::runtime_error(what), diagnostics_(std::move(diagnostics)) {}

  const std::string& diagnostics() const noexcept { return diagnostics_; }

private:
  std::string diagnostics_;
};

} // namespace outcomes
