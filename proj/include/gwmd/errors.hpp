#pragma once

#include <stdexcept>
#include <string>

namespace gwmd {

/// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Invalid parameter or input value (bad law spec, probability outside (0,1), ...).
struct DomainError : Error {
  using Error::Error;
};

/// A truncated series hit the term cap before meeting the tail criterion.
struct NonConvergentError : Error {
  using Error::Error;
};

/// Operation requires a law with bounded support.
struct UnboundedSupportError : Error {
  using Error::Error;
};

/// A generation size of zero was passed where Z >= 1 is guaranteed.
struct ZeroPopulationError : Error {
  using Error::Error;
};

/// A generation size would exceed the 64-bit range.
struct OverflowError : Error {
  using Error::Error;
};

/// Operation requires p1 > 0.
struct RequiresP1PositiveError : Error {
  using Error::Error;
};

}  // namespace gwmd
