#pragma once

#include <stdexcept>
#include <string>

namespace dsc {

// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input: bad config fields, missing files,
// dimension mismatches, violated bounds.
struct InputError : Error {
  using Error::Error;
};

// Requested coverage ratio cannot be met by any beta in (0,1).
struct CalibrationError : Error {
  using Error::Error;
};

// Network or grid-graph routing failure (unreachable target).
struct RoutingError : Error {
  using Error::Error;
};

// Local destination search found no feasible candidate within the radius.
struct EmptySearchError : RoutingError {
  using RoutingError::RoutingError;
};

}  // namespace dsc
