#pragma once

#include <stdexcept>
#include <string>

namespace repairctl {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class InvalidParameter : public Error {
public:
  using Error::Error;
};

class IncompatibleGrids : public Error {
public:
  using Error::Error;
};

/// The target density vanishes at an interior node, so the static hazard is undefined there.
class SingularTarget : public Error {
public:
  using Error::Error;
};

/// Characteristics would cross more than one cell per step.
class StepSizeError : public Error {
public:
  using Error::Error;
};

/// The delay horizon is not resolved by enough time steps.
class DelayResolutionError : public Error {
public:
  using Error::Error;
};

class InvalidTrajectory : public Error {
public:
  using Error::Error;
};

} // namespace repairctl
