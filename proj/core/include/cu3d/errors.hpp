#pragma once

#include <stdexcept>
#include <string>

namespace cu3d {

/// Base class for all cu3d exceptions.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inputs whose shapes do not agree (image sizes, matrix dimensions).
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Inputs with invalid values (non-finite depth, negative sizes, bad rates).
class InputError : public Error {
 public:
  using Error::Error;
};

/// More items to place than slots available (e.g. more masks than instance slots).
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// Cross-references that do not resolve (e.g. a mask index pointing at no mask).
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

/// File system and serialization failures; the message carries the path.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace cu3d
