#pragma once

#include <stdexcept>
#include <string>

namespace shadow {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// |h| fell below the divisor proximity floor.
class OnDivisor : public Error {
 public:
  using Error::Error;
};

class ChartUndefined : public Error {
 public:
  using Error::Error;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

class OutOfCatalog : public Error {
 public:
  using Error::Error;
};

class NotApplicable : public Error {
 public:
  using Error::Error;
};

class DanglingEdge : public Error {
 public:
  using Error::Error;
};

class OverflowGuard : public Error {
 public:
  using Error::Error;
};

// Numeric skeleton homology disagrees with the analytic oracle.
class Inconsistent : public Error {
 public:
  using Error::Error;
};

}  // namespace shadow
