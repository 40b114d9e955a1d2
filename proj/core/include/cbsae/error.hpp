#pragma once

#include <stdexcept>
#include <string>

namespace cbsae {

// Bad input: malformed files, violated preconditions, inconsistent shapes.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A well-formed problem that cannot be solved numerically (singular systems,
// degenerate constraints, sampler breakdown).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cbsae
