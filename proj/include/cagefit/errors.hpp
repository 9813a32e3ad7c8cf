#pragma once

#include <stdexcept>
#include <string>

namespace cagefit {

/// Argument outside an operation's mathematical domain (e.g. slip <= 0).
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

/// Circuit evaluation hit a numerically meaningless configuration.
struct DegenerateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Nameplate data violates its own invariants (speeds, pf/eff ranges).
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A derivative or matrix entry came out NaN/Inf where finiteness is
/// contractual.
struct NonFiniteError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed input file. Carries 1-based row and column of the offence.
struct ParseError : std::runtime_error {
  ParseError(const std::string& what, std::size_t row, std::size_t column)
      : std::runtime_error(what + " (row " + std::to_string(row) + ", column " +
                           std::to_string(column) + ")"),
        row(row),
        column(column) {}
  std::size_t row;
  std::size_t column;
};

/// A generator or solver exceeded its configured effort budget.
struct ResourceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace cagefit
