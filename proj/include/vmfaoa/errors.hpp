#pragma once

#include <stdexcept>
#include <string>

namespace vmfaoa {

// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Bad caller input: malformed angles, non-finite values, empty containers.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Geometry that leaves a quantity undefined (e.g. target at an anchor).
class DegenerateGeometry : public Error {
 public:
  using Error::Error;
};

// Direction on the +-z pole where the azimuth Jacobian does not exist.
class PoleSingularity : public Error {
 public:
  using Error::Error;
};

// Linear algebra breakdown: factorization of a non-PD matrix, etc.
class NumericalFailure : public Error {
 public:
  using Error::Error;
};

// All particle log-weights underflowed to -inf (or NaN) in one update.
class DegenerateWeights : public Error {
 public:
  using Error::Error;
};

// File could not be read/written or had an unexpected format.
class IoError : public Error {
 public:
  using Error::Error;
};

// Raised by run_filter when a per-epoch update fails; carries the epoch.
class FilterDivergence : public Error {
 public:
  FilterDivergence(int epoch, const std::string& what)
      : Error("epoch " + std::to_string(epoch) + ": " + what), epoch_(epoch) {}
  int epoch() const { return epoch_; }

 private:
  int epoch_;
};

}  // namespace vmfaoa
