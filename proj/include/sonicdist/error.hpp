// SPDX-License-Identifier: MIT
#pragma once

#include <stdexcept>
#include <string>

namespace sonicdist {

/// Bad argument to a library call (sample-rate mismatch, window too short, ...).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A ranging round was evaluated before all four timestamps arrived.
class IncompleteRound : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A complete ranging round produced a non-physical distance.
class InconsistentRound : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Fatal simulator failure (e.g. the event queue went backwards in time).
class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Scenario parse or validation failure. Carries the offending line when known.
class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(const std::string& what, int line = -1)
      : std::runtime_error(line >= 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}

  int line() const noexcept { return line_; }

 private:
  int line_;
};

}  // namespace sonicdist
