#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "bactobot/autopilot.hpp"
#include "bactobot/config.hpp"
#include "bactobot/dynamics.hpp"
#include "bactobot/mixer.hpp"

namespace bactobot {

struct TelemetryFrame {
  std::uint64_t step = 0;
  double t = 0.0;  // s
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Quaterniond attitude = Eigen::Quaterniond::Identity();
  Eigen::Vector3d lin_vel = Eigen::Vector3d::Zero();
  Eigen::Vector3d ang_vel = Eigen::Vector3d::Zero();
  std::array<double, kPairCount> pair_duties{};
  std::array<double, kArmCount> motor_speeds{};
  double heading = 0.0;  // rad
};

/// A command/mode change that takes effect before physics step `step`.
struct TimelineEntry {
  std::uint64_t step = 0;
  ManeuverCommand command;
  ModeSetting mode;
};

/// Owns the full mutable simulation state and advances it one fixed step at
/// a time. Not thread-safe; one stepping thread drives it.
class Simulator {
 public:
  explicit Simulator(ScenarioConfig cfg);

  const ScenarioConfig& config() const { return cfg_; }
  const std::vector<ArmMount>& mounts() const { return mounts_; }
  const AllocationTable& allocation() const { return table_; }

  /// Operator command; clamped into [-1, 1].
  void set_command(const ManeuverCommand& cmd) { command_ = cmd.clamped(); }
  const ManeuverCommand& command() const { return command_; }

  /// Switching mode resets the PID state.
  void set_mode(const ModeSetting& mode);
  const ModeSetting& mode() const { return mode_; }

  /// script/autopilot -> mix -> expand_pairs -> motor_step x12 -> net_wrench -> integrate_step.
  /// Throws NumericalError if the state turns non-finite.
  void step();

  std::uint64_t step_index() const { return step_; }
  double time() const { return static_cast<double>(step_) * cfg_.dt; }
  const BodyState& state() const { return state_; }
  const std::array<MotorState, kArmCount>& motors() const { return motors_; }
  const PairDuties& duties() const { return duties_; }
  const PidState& pid() const { return pid_; }

  TelemetryFrame frame() const;

 private:
  ScenarioConfig cfg_;
  std::vector<ArmMount> mounts_;
  AllocationTable table_;

  BodyState state_;
  std::array<MotorState, kArmCount> motors_{};
  PairDuties duties_;
  PidState pid_;
  ManeuverCommand command_;
  ModeSetting mode_;
  std::uint64_t step_ = 0;
};

/// Batch run driven by the config's command script (step-hold). Emits a
/// frame at step 0 and every log_decimation steps through step_count().
std::vector<TelemetryFrame> run_scenario(const ScenarioConfig& cfg);

/// Batch run driven by a recorded command timeline instead of the script.
/// Runs `steps` physics steps and logs every `log_decimation` steps.
std::vector<TelemetryFrame> replay_timeline(const ScenarioConfig& cfg, const std::vector<TimelineEntry>& timeline,
                                            std::uint64_t steps, int log_decimation);

}  // namespace bactobot
