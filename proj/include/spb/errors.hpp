#pragma once

#include <stdexcept>
#include <string>

namespace spb {

/// Invalid or degenerate geometry (bad bounds, unresolvable obstacle, broken mesh file).
class GeometryError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Requested feature outside what is implemented (e.g. quadrature degree > 10).
class CapabilityError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// API misuse: mismatched spaces, unknown form ids, parameters out of range.
class UsageError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Evaluation outside the representable range of a scalar law.
class DomainError : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

/// Linear or nonlinear solver failure.
class SolverError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

} // namespace spb
