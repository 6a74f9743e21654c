#pragma once

#include <stdexcept>
#include <string>

namespace subvec {

// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or unusable input: bad encodings, unreadable files, broken
// dataset rows, empty vocabularies, unknown segmentations.
class DataError : public Error {
 public:
  using Error::Error;
};

// Numeric failure: non-finite gradients or losses, zero-norm vectors,
// undefined correlations.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace subvec
