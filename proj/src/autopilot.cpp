#include "bactobot/autopilot.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "bactobot/errors.hpp"

namespace bactobot {

void ImuModel::validate() const {
  if (!(gyro_noise_std >= 0.0)) throw ParameterError("gyro_noise_std must be >= 0");
  if (!(heading_noise_std >= 0.0)) throw ParameterError("heading_noise_std must be >= 0");
}

void PidGains::validate() const {
  if (!(kp >= 0.0 && ki >= 0.0 && kd >= 0.0)) throw ParameterError("PID gains must be >= 0");
  if (!(integral_limit > 0.0)) throw ParameterError("integral_limit must be > 0");
}

namespace {

// Standard normals from raw 64-bit engine output via Box-Muller. The
// standard distributions are implementation-defined, the engine is not.
std::pair<double, double> gaussian_pair(std::uint64_t seed, std::uint64_t tick) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(tick), static_cast<std::uint32_t>(tick >> 32)};
  std::mt19937_64 engine(seq);
  auto uniform = [&] { return (static_cast<double>(engine() >> 11) + 0.5) * 0x1.0p-53; };
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  return {r * std::cos(theta), r * std::sin(theta)};
}

}  // namespace

ImuSample imu_sample(const BodyState& state, const ImuModel& imu, std::uint64_t tick) {
  ImuSample s{heading_of(state.attitude), state.ang_vel.z()};
  if (imu.heading_noise_std > 0.0 || imu.gyro_noise_std > 0.0) {
    const auto [n1, n2] = gaussian_pair(imu.seed, tick);
    s.heading = wrap_to_pi(s.heading + imu.heading_noise_std * n1);
    s.yaw_rate += imu.gyro_noise_std * n2;
  }
  return s;
}

double wrap_to_pi(double angle) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double a = std::remainder(angle, two_pi);
  if (a <= -std::numbers::pi) a += two_pi;
  return a;
}

PidOutput pid_step(const PidGains& gains, const PidState& state, double setpoint, double measured,
                   double yaw_rate, double dt) {
  if (!(dt > 0.0)) throw ParameterError("pid_step: dt must be > 0");

  const double error = wrap_to_pi(setpoint - measured);
  PidOutput out;
  out.state = state;
  out.state.prev_error = error;

  auto raw_output = [&](double integral) {
    return gains.kp * error + gains.ki * integral - gains.kd * yaw_rate;
  };

  const double trial = state.integral + error * dt;
  const double unsaturated = raw_output(trial);
  const bool winding = std::abs(unsaturated) > 1.0 && std::signbit(unsaturated) == std::signbit(error);
  if (!winding) out.state.integral = trial;

  if (gains.ki > 0.0) {
    const double bound = gains.integral_limit / gains.ki;
    out.state.integral = std::clamp(out.state.integral, -bound, bound);
  }

  out.yaw_cmd = std::clamp(raw_output(out.state.integral), -1.0, 1.0);
  return out;
}

}  // namespace bactobot
