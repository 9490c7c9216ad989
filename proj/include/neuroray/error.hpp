#pragma once

#include <stdexcept>
#include <string>

namespace neuroray {

/// Base of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A domain value violates its type invariant (bad dimensions, negative gaps, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Physical outcome that leaves nothing to analyse, e.g. no ray reaches the detector.
class PhysicsError : public Error {
 public:
  using Error::Error;
};

}  // namespace neuroray
