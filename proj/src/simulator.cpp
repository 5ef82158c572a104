#include "bactobot/simulator.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "bactobot/errors.hpp"

namespace bactobot {

namespace {

ScenarioConfig validated(ScenarioConfig cfg) {
  cfg.validate();
  return cfg;
}

}  // namespace

Simulator::Simulator(ScenarioConfig cfg)
    : cfg_(validated(std::move(cfg))),
      mounts_(dodecahedron_mounts(cfg_.frame)),
      table_(build_allocation(mounts_, cfg_.thrust_model, cfg_.motors, cfg_.allocation_omega_ref())),
      state_(cfg_.initial_state),
      mode_(cfg_.mode) {
  state_.attitude.normalize();
}

void Simulator::set_mode(const ModeSetting& mode) {
  if (!(mode == mode_)) pid_ = PidState{};
  mode_ = mode;
}

void Simulator::step() {
  ManeuverCommand effective = command_;
  if (mode_.mode == AutopilotMode::kHeadingHold) {
    const ImuSample imu = imu_sample(state_, cfg_.imu, step_);
    const double setpoint = wrap_to_pi(mode_.setpoint_deg * std::numbers::pi / 180.0);
    const PidOutput out = pid_step(cfg_.gains, pid_, setpoint, imu.heading, imu.yaw_rate, cfg_.dt);
    pid_ = out.state;
    effective.yaw = out.yaw_cmd;
  }

  duties_ = mix(effective, table_);
  const auto arm_duties = expand_pairs(duties_, mounts_);
  for (int i = 0; i < kArmCount; ++i) {
    motors_[i] = motor_step(motors_[i], arm_duties[i], cfg_.motors, cfg_.dt);
  }

  const WrenchBody wrench = net_wrench(state_, motors_, mounts_, cfg_.thrust_model, cfg_.robot);
  BodyState next = integrate_step(state_, wrench, cfg_.robot, cfg_.dt);
  if (!next.allFinite() || !wrench.allFinite()) {
    std::ostringstream msg;
    msg << "non-finite state at step " << step_ << " (t = " << time() << " s)";
    throw NumericalError(step_, msg.str());
  }
  state_ = next;
  ++step_;
}

TelemetryFrame Simulator::frame() const {
  TelemetryFrame f;
  f.step = step_;
  f.t = time();
  f.position = state_.position;
  f.attitude = state_.attitude;
  f.lin_vel = state_.lin_vel;
  f.ang_vel = state_.ang_vel;
  f.pair_duties = duties_.values();
  for (int i = 0; i < kArmCount; ++i) f.motor_speeds[i] = motors_[i].omega;
  f.heading = heading_of(state_.attitude);
  return f;
}

namespace {

// Index of the script entry active at `t`, or -1 before the first entry.
// A half-step slack keeps entries on exact step boundaries from slipping a
// step due to rounding of t_start / dt.
long active_entry(const std::vector<ScriptEntry>& script, double t, double dt) {
  long active = -1;
  for (std::size_t i = 0; i < script.size(); ++i) {
    if (script[i].t_start <= t + 0.5 * dt) active = static_cast<long>(i);
  }
  return active;
}

}  // namespace

std::vector<TelemetryFrame> run_scenario(const ScenarioConfig& cfg) {
  Simulator sim(cfg);
  std::vector<TelemetryFrame> log;
  const std::uint64_t steps = cfg.step_count();
  log.reserve(steps / cfg.log_decimation + 2);

  long current = -2;
  for (std::uint64_t n = 0;; ++n) {
    const long entry = active_entry(cfg.command_script, sim.time(), cfg.dt);
    if (entry != current) {
      current = entry;
      if (entry >= 0) {
        const auto& e = cfg.command_script[entry];
        sim.set_command({e.surge, e.yaw});
      } else {
        sim.set_command({});
      }
    }
    if (n % cfg.log_decimation == 0) log.push_back(sim.frame());
    if (n == steps) break;
    sim.step();
  }
  return log;
}

std::vector<TelemetryFrame> replay_timeline(const ScenarioConfig& cfg, const std::vector<TimelineEntry>& timeline,
                                            std::uint64_t steps, int log_decimation) {
  if (log_decimation < 1) throw ParameterError("log_decimation must be >= 1");
  Simulator sim(cfg);
  std::vector<TelemetryFrame> log;
  std::size_t next = 0;
  for (std::uint64_t n = 0;; ++n) {
    while (next < timeline.size() && timeline[next].step <= n) {
      sim.set_command(timeline[next].command);
      sim.set_mode(timeline[next].mode);
      ++next;
    }
    if (n % log_decimation == 0) log.push_back(sim.frame());
    if (n == steps) break;
    sim.step();
  }
  return log;
}

}  // namespace bactobot
