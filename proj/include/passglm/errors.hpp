#pragma once

#include <stdexcept>
#include <string>

namespace passglm {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller supplied an argument outside an operation's domain.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Non-finite or otherwise unusable intermediate value.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Requested statistics exceed the configured capacity.
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// Iterative solver did not reach its tolerance.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Malformed serialized data or input file.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Two objects that must share configuration do not.
class MismatchError : public Error {
 public:
  using Error::Error;
};

}  // namespace passglm
