#pragma once

#include <stdexcept>
#include <string>

namespace mgfem {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand sizes do not conform.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A NaN or Inf reached a kernel that requires finite input.
class NonFiniteError : public Error {
 public:
  using Error::Error;
};

/// Singular matrix, zero diagonal, degenerate element and similar.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// A requested feature is outside what the library supports.
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

}  // namespace mgfem
