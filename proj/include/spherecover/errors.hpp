#pragma once

#include <stdexcept>
#include <string>

namespace spherecover {

// Base of everything the library throws on bad input. The CLI maps these to
// exit code 1; anything else is treated as an internal error.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidDimension : public Error {
 public:
  explicit InvalidDimension(int d)
      : Error("invalid dimension d=" + std::to_string(d) + " (need d >= 2)") {}
};

class WrongDimension : public Error {
 public:
  WrongDimension(int expected, int got)
      : Error("operation requires d=" + std::to_string(expected) +
              ", got d=" + std::to_string(got)) {}
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class ParameterError : public Error {
 public:
  using Error::Error;
};

class SolverError : public Error {
 public:
  using Error::Error;
};

class DegenerateDistribution : public Error {
 public:
  using Error::Error;
};

}  // namespace spherecover
