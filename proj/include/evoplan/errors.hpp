#pragma once

#include <stdexcept>
#include <string>

namespace evoplan {

// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A caller-supplied value violates a documented precondition or invariant.
struct InvalidInputError : Error {
  using Error::Error;
};

// The requested operating point cannot satisfy the rate constraints
// (e.g. the feature stream alone exceeds the uplink capacity).
struct InfeasibleError : Error {
  using Error::Error;
};

// Structured-text input could not be parsed; the message carries
// "<file>:<line>: <reason>".
struct ParseError : Error {
  using Error::Error;
};

}  // namespace evoplan
