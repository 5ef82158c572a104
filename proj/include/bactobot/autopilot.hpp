#pragma once

#include <cstdint>

#include "bactobot/dynamics.hpp"

namespace bactobot {

struct ImuModel {
  double gyro_noise_std = 0.002;     // rad/s
  double heading_noise_std = 0.005;  // rad
  std::uint64_t seed = 42;

  void validate() const;
};

struct ImuSample {
  double heading = 0.0;   // rad, (-pi, pi]
  double yaw_rate = 0.0;  // rad/s
};

/// Noisy heading and yaw-rate reading. The noise is a pure function of
/// (seed, tick), so replaying a tick reproduces the sample exactly.
ImuSample imu_sample(const BodyState& state, const ImuModel& imu, std::uint64_t tick);

struct PidGains {
  double kp = 6.0;              // 1/rad
  double ki = 0.1;              // 1/(rad s)
  double kd = 12.0;             // s/rad
  double integral_limit = 0.2;  // max |ki * integral|

  void validate() const;
};

struct PidState {
  double integral = 0.0;    // rad s
  double prev_error = 0.0;  // rad
};

struct PidOutput {
  double yaw_cmd = 0.0;  // [-1, 1]
  PidState state;
};

/// Wraps an angle into (-pi, pi].
double wrap_to_pi(double angle);

/// Heading-hold PID. The derivative acts on the measured yaw rate, the
/// integral is clamped to |ki*integral| <= integral_limit, and integration
/// pauses while the output is saturated in the direction of the error.
PidOutput pid_step(const PidGains& gains, const PidState& state, double setpoint, double measured,
                   double yaw_rate, double dt);

}  // namespace bactobot
