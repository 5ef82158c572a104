#pragma once

#include <array>
#include <vector>

#include "bactobot/geometry.hpp"

namespace bactobot {

struct MotorParams {
  double omega_max = 31.4;       // rad/s at full duty
  double time_constant = 0.15;   // s

  void validate() const;
};

struct MotorState {
  double omega = 0.0;  // rad/s
};

/// Signed duty per H-bridge channel. Components are clamped to [-1, 1] on
/// construction and on every `set`.
class PairDuties {
 public:
  PairDuties() = default;
  explicit PairDuties(const std::array<double, kPairCount>& duties);

  double operator[](int pair) const { return duties_.at(pair); }
  void set(int pair, double duty);
  const std::array<double, kPairCount>& values() const { return duties_; }

  friend bool operator==(const PairDuties&, const PairDuties&) = default;

 private:
  std::array<double, kPairCount> duties_{};
};

/// Arm i gets the duty of its pair channel; both arms of a pair always match.
std::array<double, kArmCount> expand_pairs(const PairDuties& duties, const std::vector<ArmMount>& mounts);

/// Exact discretization of  d(omega)/dt = (duty*omega_max - omega) / time_constant.
MotorState motor_step(MotorState state, double duty, const MotorParams& p, double dt);

}  // namespace bactobot
