#pragma once

#include <stdexcept>
#include <string>

namespace cournot {

/// Argument outside the domain where an operation is defined.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Mismatched grids, matrix shapes or point dimensions.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A measure with no positive mass where one is required.
class DegenerateMeasureError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// |grad_x dy_c| vanished along a level curve.
class SingularityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A scalar root solve or LP pivot loop failed to terminate.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cournot
