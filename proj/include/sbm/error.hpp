#pragma once

#include <stdexcept>
#include <string>

namespace sbm {

/// Runtime failure: I/O, corrupt input, numerical guard.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller violated a parameter or shape constraint.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

}  // namespace sbm
