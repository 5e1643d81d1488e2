#pragma once

#include <stdexcept>
#include <string>

namespace maxent_tomo {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TruncationError : public Error {
 public:
  using Error::Error;
};

class EigError : public Error {
 public:
  using Error::Error;
};

class QuadratureError : public Error {
 public:
  using Error::Error;
};

class DegenerateRotationError : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class MissingMeans : public Error {
 public:
  using Error::Error;
};

class FitDivergence : public Error {
 public:
  using Error::Error;
};

class EmptyAfterClamp : public Error {
 public:
  using Error::Error;
};

// Malformed files, configs, or arguments.
class InputError : public Error {
 public:
  using Error::Error;
};

}  // namespace maxent_tomo
