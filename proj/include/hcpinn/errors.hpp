#pragma once

#include <stdexcept>
#include <string>

namespace hcpinn {

// Base for everything thrown by the library.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed or inconsistent user configuration (bad key, bad value, bad layout).
struct ConfigError : Error {
  using Error::Error;
};

// Failure while evaluating an expression: division by zero, |x| at its kink,
// or a NaN produced on the tape. node_id is the offending tape node (-1 when
// the failure happened outside a tape).
struct EvalError : Error {
  int node_id;
  explicit EvalError(const std::string& what, int node = -1)
      : Error(what), node_id(node) {}
};

// Geometric preconditions violated (point outside domain, degenerate interface).
struct GeometryError : Error {
  using Error::Error;
};

// Linear solver trouble: singular system, excessive condition number,
// iteration failing to reach tolerance.
struct SolverError : Error {
  using Error::Error;
};

// API contract violations that indicate a bug in the calling code,
// e.g. evaluating a buffer ansatz with stale degrees of freedom.
struct ContractError : Error {
  using Error::Error;
};

// Collocation sets that violate their placement invariants.
struct CollocationError : Error {
  using Error::Error;
};

}  // namespace hcpinn
