#pragma once

#include <stdexcept>
#include <string>

namespace kita {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// invalid physical argument or out-of-domain input
struct DomainError : Error {
  using Error::Error;
};

// configuration file problems; message carries the offending key path
struct ConfigError : Error {
  using Error::Error;
};

// evaluation at (or too close to) a lossless-model resonance pole
struct PoleError : Error {
  using Error::Error;
};

// phase unwrapping could not be made continuous on the given grid
struct UnwrapError : Error {
  using Error::Error;
};

// adaptive integrator failed; `position` is the cell coordinate reached
struct IntegrationError : Error {
  double position = 0.0;
  IntegrationError(const std::string& msg, double x) : Error(msg), position(x) {}
};

// fitting problems (insufficient data, no convergence, no crossing, ...)
struct FitError : Error {
  using Error::Error;
};

// malformed or insufficient input data files
struct DataError : Error {
  using Error::Error;
};

}  // namespace kita
