#pragma once

#include <stdexcept>
#include <string>

namespace cipwave {

/// Malformed or inconsistent input data (files, configuration).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Failure of a numerical procedure: CFL violation, non-finite values.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cipwave
