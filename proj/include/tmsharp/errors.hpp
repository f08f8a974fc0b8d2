#pragma once

#include <stdexcept>
#include <string>

namespace tmsharp {

/// Argument outside the documented domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// An iterative solver failed to reach its tolerance.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace tmsharp
