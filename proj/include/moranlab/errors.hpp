#pragma once

#include <stdexcept>
#include <string>

namespace moranlab {

// Every error a library call can raise derives from Error. The CLI maps the
// concrete type onto its exit code (see exit_code()).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad argument: out of range, malformed input, violated precondition.
class ParameterError : public Error {
 public:
  using Error::Error;
};

// A formula was asked for outside the region where it is defined.
class DomainError : public Error {
 public:
  using Error::Error;
};

// The graph does not have the shape the operation needs (e.g. disconnected).
class StructureError : public Error {
 public:
  using Error::Error;
};

// Operation invoked on a state it does not apply to (e.g. an absorbed state).
class StateError : public Error {
 public:
  using Error::Error;
};

// Problem size exceeds a configured cap.
class CapacityError : public Error {
 public:
  using Error::Error;
};

// A walk specification whose coefficients do not form a probability
// decomposition.
class SpecificationError : public Error {
 public:
  using Error::Error;
};

// A rejection-sampled conditioning event was not realised within budget.
class ConditioningError : public Error {
 public:
  using Error::Error;
};

// Process exit codes: 0 success, 2 parameter, 3 structure/conditioning,
// 4 capacity.
inline int exit_code(const Error& e) {
  if (dynamic_cast<const StructureError*>(&e) != nullptr ||
      dynamic_cast<const ConditioningError*>(&e) != nullptr ||
      dynamic_cast<const StateError*>(&e) != nullptr) {
    return 3;
  }
  if (dynamic_cast<const CapacityError*>(&e) != nullptr) {
    return 4;
  }
  return 2;
}

}  // namespace moranlab
