#pragma once

#include <stdexcept>
#include <string>

namespace rqt {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// bad physical input or evaluation outside a chart
class DomainError : public Error {
 public:
  using Error::Error;
};

class ToleranceError : public Error {
 public:
  ToleranceError(const std::string& what, double achieved)
      : Error(what), achieved_(achieved) {}
  double achieved() const { return achieved_; }

 private:
  double achieved_;
};

class HilbertSpaceMismatch : public DomainError {
 public:
  using DomainError::DomainError;
};
class AdaptationSingular : public DomainError {
 public:
  using DomainError::DomainError;
};
class DegenerateSetup : public DomainError {
 public:
  using DomainError::DomainError;
};
class OrthogonalStates : public DomainError {
 public:
  using DomainError::DomainError;
};
class WavevectorMismatch : public DomainError {
 public:
  using DomainError::DomainError;
};
class ComplexVelocity : public DomainError {
 public:
  using DomainError::DomainError;
};

}  // namespace rqt
