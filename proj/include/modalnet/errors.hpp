#pragma once

#include <stdexcept>
#include <string>

namespace modalnet {

/// Base class for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

/// Inconsistent matrix sizes, either in a model file or in a direct call.
class DimensionError : public Error {
 public:
  using Error::Error;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class ConvergenceFailure : public Error {
 public:
  using Error::Error;
};

/// The network matrix lacks a full eigenvector basis; the modal theory does
/// not apply and analysis refuses to continue.
class DefectiveNetworkMatrix : public Error {
 public:
  using Error::Error;
};

class ScaleLimit : public Error {
 public:
  using Error::Error;
};

class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

class EmptySubset : public Error {
 public:
  using Error::Error;
};

class NotInvariantMode : public Error {
 public:
  using Error::Error;
};

class PreconditionFailed : public Error {
 public:
  using Error::Error;
};

}  // namespace modalnet
