#pragma once

#include <stdexcept>
#include <string>

namespace legspec {

/// Root of the library's exception hierarchy.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad arguments: non-finite samples, degenerate forms, mismatched bases.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// A transported jet slice stopped being a graph over the circle.
class FoldError : public Error {
 public:
  using Error::Error;
};

/// A generator or atom outside the classes the pipelines can realize.
class UnsupportedClass : public Error {
 public:
  using Error::Error;
};

/// Numerical pipeline failure (wrong essential-class count, box too small, ...).
class PipelineError : public Error {
 public:
  using Error::Error;
};

}  // namespace legspec
