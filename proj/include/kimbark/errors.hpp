#pragma once

#include <stdexcept>
#include <string>

namespace kimbark {

// Base class for every failure the library raises deliberately.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent case data; the message names the offending field.
class CaseError : public Error {
 public:
  using Error::Error;
};

// Network construction or reduction failure (singular block, unknown bus).
class NetworkError : public Error {
 public:
  using Error::Error;
};

// Numerical breakdown while integrating (non-finite state).
class SimulationError : public Error {
 public:
  using Error::Error;
};

// A caller violated a precondition (bad time grid, bad bracket, bad subset).
class UsageError : public Error {
 public:
  using Error::Error;
};

}  // namespace kimbark
