#pragma once

#include <stdexcept>
#include <string>

namespace flatproc {

// Caller mistakes derive from std::invalid_argument, data/numerical failures
// from std::runtime_error.
class OrderOutOfRange : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class QuadratureNonConvergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InsufficientData : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DegenerateVariance : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace flatproc
