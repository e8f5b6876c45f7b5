#pragma once

#include <stdexcept>
#include <string>

namespace ddmiqo {

/// Malformed or inconsistent input (dimensions, flags, files). CLI exit code 2.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical failure: non-positive-definite data, non-convergence. CLI exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A configured resource budget (arcs, paths, enumeration size) was exceeded. CLI exit code 4.
class BudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ddmiqo
