#pragma once

#include <stdexcept>
#include <string>

namespace telsim {

/// Malformed topology or CSV text.
class ParseError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Well-formed input that violates a model invariant (duplicate id, load
/// outside (0,1), dangling endpoint, unreachable ACO/MACO pair, ...).
class ValidationError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// No path between two nodes, or an unknown node/link id.
class RoutingError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Numeric argument outside the domain of a formula.
class DomainError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Calibration could not reach the requested target within tolerance.
class InfeasibleError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

} // namespace telsim
