#pragma once

#include <stdexcept>
#include <string>

namespace qd {

// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Malformed or truncated file contents.
class FormatError : public Error {
 public:
  using Error::Error;
};

class DegenerateMesh : public Error {
 public:
  using Error::Error;
};

class InvalidSpec : public Error {
 public:
  using Error::Error;
};

// Tensor or network shapes that do not chain.
class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

class EmptyDataset : public Error {
 public:
  using Error::Error;
};

class EmptyCloud : public Error {
 public:
  using Error::Error;
};

// A model's output width or grid does not match the detector configuration.
class ModelMismatch : public Error {
 public:
  using Error::Error;
};

}  // namespace qd
