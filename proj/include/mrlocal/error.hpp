#pragma once

#include <stdexcept>
#include <string>

namespace mrlocal {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input: missing file, malformed header, invalid configuration, empty data.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// An estimator cannot be evaluated on the given data (e.g. dIVW denominator <= 0).
class DegeneracyError : public Error {
 public:
  using Error::Error;
};

}  // namespace mrlocal
