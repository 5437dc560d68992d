#pragma once

#include <stdexcept>
#include <string>

namespace racelab {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text (grid header, CSV, config, snapshot).
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Payload shorter than the header promised.
class TruncationError : public Error {
 public:
  using Error::Error;
};

/// Grid does not contain exactly one closed drivable loop.
class TopologyError : public Error {
 public:
  using Error::Error;
};

/// Box constraints of the raceline problem are empty somewhere.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

class ParameterError : public Error {
 public:
  using Error::Error;
};

class SpawnError : public Error {
 public:
  using Error::Error;
};

class LoadError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace racelab
