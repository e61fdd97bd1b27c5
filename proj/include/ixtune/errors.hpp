#pragma once

#include <stdexcept>
#include <string>

namespace ixtune {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed or semantically invalid input (documents, plans, flags).
struct InputError : Error {
  using Error::Error;
};

/// Failure while talking to an external advisory service.
struct ServiceError : Error {
  using Error::Error;
};

/// Broken internal assumption, e.g. a plan/catalog mismatch mid-traversal.
struct InternalError : Error {
  using Error::Error;
};

}  // namespace ixtune
