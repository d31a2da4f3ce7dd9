#pragma once

#include <stdexcept>
#include <string>

namespace prefrec {

// Error categories map onto CLI exit codes (see tools/prefrec.cpp).
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Bad flags, conflicting options, invalid configuration values.
class ConfigError : public Error {
public:
  using Error::Error;
};

// Malformed input files; messages carry the offending line number.
class ParseError : public Error {
public:
  using Error::Error;
};

// Structurally valid input that violates a domain invariant
// (duplicate ids, dimension mismatch, empty datasets, ...).
class DataError : public Error {
public:
  using Error::Error;
};

// Numerical failure: non-finite gradients, diverged training.
class NumericError : public Error {
public:
  using Error::Error;
};

}  // namespace prefrec
