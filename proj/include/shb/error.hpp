#pragma once

#include <stdexcept>
#include <string>

namespace shb {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when a rate generator or propagator contains non-finite entries.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Effective lifetime requested with beta = 1: no spin-changing decay channel.
class NoDecayChannelError : public Error {
 public:
  using Error::Error;
};

class NonUniqueSteadyStateError : public Error {
 public:
  using Error::Error;
};

}  // namespace shb
