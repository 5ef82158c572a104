#pragma once

#include <array>
#include <vector>

#include "bactobot/actuation.hpp"
#include "bactobot/flagella.hpp"
#include "bactobot/geometry.hpp"

namespace bactobot {

struct ManeuverCommand {
  double surge = 0.0;  // [-1, 1], forward effort along body x
  double yaw = 0.0;    // [-1, 1], turn effort about body z

  ManeuverCommand clamped() const;
  friend bool operator==(const ManeuverCommand&, const ManeuverCommand&) = default;
};

struct AllocationTable {
  std::array<WrenchBody, kPairCount> unit_wrenches;  // per unit duty, body at rest
  std::array<double, kPairCount> surge_weights{};
  std::array<double, kPairCount> yaw_weights{};
  double omega_ref = 0.0;
};

/// Steady-state wrench of pair `pair` with both motors at `omega`, body at rest.
WrenchBody pair_wrench(const std::vector<ArmMount>& mounts, const ThrustModel& model, int pair, double omega);

/// Steady-state wrench of a full duty vector (motors settled at duty*omega_max).
WrenchBody steady_wrench(const std::vector<ArmMount>& mounts, const ThrustModel& model,
                         const MotorParams& motor, const PairDuties& duties);

/// Least-squares allocation for unit surge force (zero torque) and unit yaw
/// torque (zero force), each normalized to a max |weight| of 1.
/// Throws SingularAllocation when a target lies outside the wrench span.
AllocationTable build_allocation(const std::vector<ArmMount>& mounts, const ThrustModel& model,
                                 const MotorParams& motor, double omega_ref);

PairDuties mix(const ManeuverCommand& cmd, const AllocationTable& table);

}  // namespace bactobot
