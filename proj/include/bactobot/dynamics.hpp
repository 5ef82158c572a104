#pragma once

#include <array>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "bactobot/actuation.hpp"
#include "bactobot/flagella.hpp"
#include "bactobot/geometry.hpp"

namespace bactobot {

using Vector6d = Eigen::Matrix<double, 6, 1>;

struct BodyState {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();            // m, world (z up)
  Eigen::Quaterniond attitude = Eigen::Quaterniond::Identity();  // body -> world
  Eigen::Vector3d lin_vel = Eigen::Vector3d::Zero();             // m/s, body
  Eigen::Vector3d ang_vel = Eigen::Vector3d::Zero();             // rad/s, body

  bool allFinite() const {
    return position.allFinite() && attitude.coeffs().allFinite() && lin_vel.allFinite() &&
           ang_vel.allFinite();
  }
};

struct RobotParams {
  double dry_mass = 6.25;        // kg
  double ballast_mass = 5.0;     // kg
  double displaced_volume = 11.25 / 998.0;  // m^3
  Eigen::Vector3d r_cob{0.0, 0.0, 0.02};    // m, CoB relative to CoM, body
  Eigen::Matrix3d inertia = 0.10 * Eigen::Matrix3d::Identity();  // kg m^2, about CoM
  Vector6d added_mass = (Vector6d() << 5.625, 5.625, 5.625, 0.05, 0.05, 0.05).finished();
  Vector6d drag_linear = (Vector6d() << 4.0, 4.0, 4.0, 0.05, 0.05, 0.05).finished();
  Vector6d drag_quadratic = (Vector6d() << 20.0, 20.0, 20.0, 0.05, 0.05, 0.05).finished();
  double fluid_density = 998.0;  // kg/m^3
  double gravity = 9.81;         // m/s^2

  double total_mass() const { return dry_mass + ballast_mass; }
  void validate() const;
};

/// Rigid-body plus added-mass inertia, 6x6, ordered (linear, angular).
Eigen::Matrix<double, 6, 6> generalized_mass(const RobotParams& p);

/// Gravity at the CoM plus buoyancy at the CoB, expressed in the body frame.
WrenchBody restoring_wrench(const Eigen::Quaterniond& attitude, const RobotParams& p);

/// Linear plus quadratic diagonal damping, applied componentwise.
WrenchBody drag_wrench(const BodyState& state, const RobotParams& p);

/// Sum of the 12 arm wrenches, hull drag, and the restoring wrench.
WrenchBody net_wrench(const BodyState& state, const std::array<MotorState, kArmCount>& motors,
                      const std::vector<ArmMount>& mounts, const ThrustModel& model, const RobotParams& p);

/// One semi-implicit Euler step of the body-frame Kirchhoff equations:
/// velocities are advanced first from the wrench and the momentum coupling,
/// then the pose is advanced with the new velocities. The attitude update is
/// the exponential map of ang_vel*dt followed by renormalization.
/// dt must lie in (0, 0.1].
BodyState integrate_step(const BodyState& state, const WrenchBody& wrench, const RobotParams& p, double dt);

/// Kinetic energy including added mass.
double kinetic_energy(const BodyState& state, const RobotParams& p);

/// Angular momentum about the CoM in the world frame (rigid + added inertia).
Eigen::Vector3d angular_momentum_world(const BodyState& state, const RobotParams& p);

/// ZYX Euler angles (roll, pitch, yaw) of the body attitude.
Eigen::Vector3d roll_pitch_yaw(const Eigen::Quaterniond& q);

Eigen::Quaterniond from_roll_pitch_yaw(double roll, double pitch, double yaw);

/// Heading (yaw) in (-pi, pi], z-up.
double heading_of(const Eigen::Quaterniond& q);

}  // namespace bactobot
