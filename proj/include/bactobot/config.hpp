#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "bactobot/actuation.hpp"
#include "bactobot/autopilot.hpp"
#include "bactobot/ballast.hpp"
#include "bactobot/dynamics.hpp"
#include "bactobot/flagella.hpp"
#include "bactobot/geometry.hpp"

namespace bactobot {

enum class AutopilotMode { kOpenLoop, kHeadingHold };

struct ModeSetting {
  AutopilotMode mode = AutopilotMode::kOpenLoop;
  double setpoint_deg = 0.0;

  friend bool operator==(const ModeSetting&, const ModeSetting&) = default;
};

const char* mode_name(AutopilotMode mode);
AutopilotMode parse_mode_name(const std::string& name);  // throws ParameterError

/// Step-hold command: active from t_start until the next entry.
struct ScriptEntry {
  double t_start = 0.0;  // s
  double surge = 0.0;
  double yaw = 0.0;
};

struct ScenarioConfig {
  FrameParams frame;
  RobotParams robot;
  MotorParams motors;
  ThrustModel thrust_model = ResistiveHelix{};
  ImuModel imu;
  PidGains gains;
  ModeSetting mode;
  std::vector<ScriptEntry> command_script;
  double dt = 1e-3;          // s
  double duration = 60.0;    // s
  int log_decimation = 50;
  double omega_ref = 0.0;    // rad/s for the allocation table; 0 means 0.7 * omega_max
  WeightInventory ballast_inventory{{{0.5, 6}, {1.0, 2}}};
  BodyState initial_state;

  double allocation_omega_ref() const { return omega_ref > 0.0 ? omega_ref : 0.7 * motors.omega_max; }
  std::uint64_t step_count() const;

  /// Throws ConfigError naming the first invalid field.
  void validate() const;
};

/// Builds a config from JSON. Missing keys keep their defaults; unknown keys
/// and invalid values raise ConfigError with the dotted key path.
ScenarioConfig parse_config(const nlohmann::json& doc);
ScenarioConfig load_config(const std::filesystem::path& path);

/// Canonical JSON form. parse_config(to_json(c)) reproduces c up to the
/// rounding of the initial attitude through roll/pitch/yaw degrees.
nlohmann::json to_json(const ScenarioConfig& cfg);

/// FNV-1a 64 of the canonical JSON dump, as 16 hex digits.
std::string config_hash(const ScenarioConfig& cfg);

}  // namespace bactobot
