#include "bactobot/actuation.hpp"

#include <algorithm>
#include <cmath>

#include "bactobot/errors.hpp"

namespace bactobot {

void MotorParams::validate() const {
  if (!(omega_max > 0.0)) throw ParameterError("omega_max must be > 0");
  if (!(time_constant > 0.0)) throw ParameterError("time_constant must be > 0");
}

PairDuties::PairDuties(const std::array<double, kPairCount>& duties) {
  for (int i = 0; i < kPairCount; ++i) set(i, duties[i]);
}

void PairDuties::set(int pair, double duty) {
  if (std::isnan(duty)) throw ParameterError("duty is NaN");
  duties_.at(pair) = std::clamp(duty, -1.0, 1.0);
}

std::array<double, kArmCount> expand_pairs(const PairDuties& duties, const std::vector<ArmMount>& mounts) {
  if (mounts.size() != static_cast<std::size_t>(kArmCount)) {
    throw ContractViolation("expand_pairs needs 12 mounts");
  }
  std::array<double, kArmCount> arm{};
  for (const auto& m : mounts) arm.at(m.index) = duties[pair_of(m.index)];
  return arm;
}

MotorState motor_step(MotorState state, double duty, const MotorParams& p, double dt) {
  if (!(dt > 0.0)) throw ParameterError("motor_step: dt must be > 0");
  const double target = std::clamp(duty, -1.0, 1.0) * p.omega_max;
  const double blend = -std::expm1(-dt / p.time_constant);
  state.omega += (target - state.omega) * blend;
  return state;
}

}  // namespace bactobot
