#pragma once

#include <stdexcept>
#include <string>

namespace hopflab {

// Base for every error raised by the library. Callers that only care about
// "something went wrong in the numerics" catch this.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class ParameterError : public Error {
 public:
  using Error::Error;
};

class SingularInputError : public Error {
 public:
  using Error::Error;
};

class PackingError : public Error {
 public:
  using Error::Error;
};

class PlacementError : public Error {
 public:
  using Error::Error;
};

class PatchError : public Error {
 public:
  using Error::Error;
};

class DescriptorError : public Error {
 public:
  using Error::Error;
};

class RegionError : public Error {
 public:
  using Error::Error;
};

class BudgetError : public Error {
 public:
  using Error::Error;
};

class UnresolvedDegreeError : public Error {
 public:
  using Error::Error;
};

class NonRegularValueError : public Error {
 public:
  using Error::Error;
};

class IllConditionedLinkingError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace hopflab
