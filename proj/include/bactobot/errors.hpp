#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace bactobot {

/// Invalid physical or numerical parameter passed to a model function.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Caller broke a documented precondition (e.g. index out of range).
class ContractViolation : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Scenario configuration failed validation. `field()` names the offending
/// key path, e.g. "robot.dry_mass_kg".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& msg)
      : std::runtime_error(field + ": " + msg), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// The pair unit wrenches cannot produce the requested allocation target.
class SingularAllocation : public std::runtime_error {
 public:
  SingularAllocation(int rank, const std::string& msg)
      : std::runtime_error(msg), rank_(rank) {}
  int rank() const noexcept { return rank_; }

 private:
  int rank_;
};

/// Simulation state became non-finite.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(std::uint64_t step, const std::string& msg)
      : std::runtime_error(msg), step_(step) {}
  std::uint64_t step() const noexcept { return step_; }

 private:
  std::uint64_t step_;
};

}  // namespace bactobot
