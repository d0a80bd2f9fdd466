#pragma once

#include <stdexcept>
#include <string>

namespace wsod {

/// Base class for all recoverable errors raised by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input data violates a documented constraint (bad values, unknown ids, ...).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Text input could not be tokenized (XML, detection or label files).
class ParseError : public DataError {
 public:
  using DataError::DataError;
};

/// Structurally valid input missing a required element.
class SchemaError : public DataError {
 public:
  using DataError::DataError;
};

/// An operation was invoked outside of its stated preconditions.
class ContractError : public Error {
 public:
  using Error::Error;
};

/// A numeric kernel was evaluated outside its domain (e.g. log of zero).
class DomainError : public Error {
 public:
  using Error::Error;
};

}  // namespace wsod
