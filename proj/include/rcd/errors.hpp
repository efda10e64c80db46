#pragma once

#include <stdexcept>
#include <string>

namespace rcd {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad argument values (wrong point counts, nonpositive radii, ...).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Collinear / coplanar / coincident points where a simplex is required.
class DegeneracyError : public Error {
 public:
  using Error::Error;
};

/// Agent set cannot support a network (too few agents, ...).
class ConfigurationError : public Error {
 public:
  using Error::Error;
};

class SelectionError : public Error {
 public:
  using Error::Error;
};

/// A follower has no admissible enclosing simplex.
class ConnectivityError : public Error {
 public:
  using Error::Error;
};

/// D singular or not Hurwitz.
class NetworkError : public Error {
 public:
  using Error::Error;
};

class CommunicationError : public Error {
 public:
  using Error::Error;
};

/// Flow query at a doublet center.
class SingularityError : public Error {
 public:
  using Error::Error;
};

/// Flow Jacobian too small to define a streamline velocity.
class StagnationError : public Error {
 public:
  using Error::Error;
};

/// Scenario document or scenario semantics are invalid (CLI exit code 2).
class ScenarioError : public Error {
 public:
  using Error::Error;
};

/// Non-finite state during simulation (CLI exit code 3).
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace rcd
