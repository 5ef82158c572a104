#include "bactobot/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Cholesky>

#include "bactobot/errors.hpp"

namespace bactobot {

void RobotParams::validate() const {
  if (!(dry_mass > 0.0)) throw ParameterError("dry_mass must be > 0");
  if (!(ballast_mass >= 0.0)) throw ParameterError("ballast_mass must be >= 0");
  if (!(displaced_volume > 0.0)) throw ParameterError("displaced_volume must be > 0");
  if (!(fluid_density > 0.0)) throw ParameterError("fluid_density must be > 0");
  if (!(gravity > 0.0)) throw ParameterError("gravity must be > 0");
  if (!r_cob.allFinite()) throw ParameterError("r_cob must be finite");
  if (!inertia.isApprox(inertia.transpose(), 1e-12)) throw ParameterError("inertia must be symmetric");
  Eigen::LLT<Eigen::Matrix3d> llt(inertia);
  if (llt.info() != Eigen::Success) throw ParameterError("inertia must be positive definite");
  if ((added_mass.array() < 0.0).any()) throw ParameterError("added_mass must be >= 0");
  if ((drag_linear.array() < 0.0).any()) throw ParameterError("drag_linear must be >= 0");
  if ((drag_quadratic.array() < 0.0).any()) throw ParameterError("drag_quadratic must be >= 0");
}

Eigen::Matrix<double, 6, 6> generalized_mass(const RobotParams& p) {
  Eigen::Matrix<double, 6, 6> m = Eigen::Matrix<double, 6, 6>::Zero();
  m.topLeftCorner<3, 3>() = p.total_mass() * Eigen::Matrix3d::Identity();
  m.bottomRightCorner<3, 3>() = p.inertia;
  m.diagonal() += p.added_mass;
  return m;
}

WrenchBody restoring_wrench(const Eigen::Quaterniond& attitude, const RobotParams& p) {
  const Eigen::Matrix3d world_to_body = attitude.toRotationMatrix().transpose();
  const Eigen::Vector3d up = world_to_body * Eigen::Vector3d::UnitZ();
  const double weight = p.total_mass() * p.gravity;
  const double buoyancy = p.fluid_density * p.gravity * p.displaced_volume;

  WrenchBody w;
  w.force = (buoyancy - weight) * up;
  w.torque = p.r_cob.cross(buoyancy * up);
  return w;
}

WrenchBody drag_wrench(const BodyState& state, const RobotParams& p) {
  Vector6d nu;
  nu << state.lin_vel, state.ang_vel;
  const Vector6d d = -(p.drag_linear.array() * nu.array() +
                       p.drag_quadratic.array() * nu.array().abs() * nu.array()).matrix();
  return {d.head<3>(), d.tail<3>()};
}

WrenchBody net_wrench(const BodyState& state, const std::array<MotorState, kArmCount>& motors,
                      const std::vector<ArmMount>& mounts, const ThrustModel& model, const RobotParams& p) {
  if (mounts.size() != static_cast<std::size_t>(kArmCount)) {
    throw ContractViolation("net_wrench needs 12 mounts");
  }
  WrenchBody total;
  for (const auto& m : mounts) {
    total += arm_wrench(m, model, motors[m.index].omega, state.lin_vel, state.ang_vel);
  }
  total += drag_wrench(state, p);
  total += restoring_wrench(state.attitude, p);
  return total;
}

namespace {

// Momentum coupling of the Kirchhoff equations: (w x P, w x H + v x P).
Vector6d coupling_terms(const Eigen::Matrix<double, 6, 6>& mass, const Vector6d& nu) {
  const Vector6d momentum = mass * nu;
  const Eigen::Vector3d v = nu.head<3>();
  const Eigen::Vector3d w = nu.tail<3>();
  const Eigen::Vector3d lin = momentum.head<3>();
  const Eigen::Vector3d ang = momentum.tail<3>();
  Vector6d c;
  c << w.cross(lin), w.cross(ang) + v.cross(lin);
  return c;
}

Eigen::Quaterniond exp_map(const Eigen::Vector3d& rotation) {
  const double angle = rotation.norm();
  if (angle < 1e-300) return Eigen::Quaterniond::Identity();
  const Eigen::Vector3d axis = rotation / angle;
  return Eigen::Quaterniond(Eigen::AngleAxisd(angle, axis));
}

}  // namespace

BodyState integrate_step(const BodyState& state, const WrenchBody& wrench, const RobotParams& p, double dt) {
  if (!(dt > 0.0 && dt <= 0.1)) throw ParameterError("integrate_step: dt must lie in (0, 0.1]");

  const Eigen::Matrix<double, 6, 6> mass = generalized_mass(p);
  Vector6d nu;
  nu << state.lin_vel, state.ang_vel;
  Vector6d tau;
  tau << wrench.force, wrench.torque;

  const Vector6d accel = mass.ldlt().solve(tau - coupling_terms(mass, nu));
  nu += dt * accel;

  BodyState next = state;
  next.lin_vel = nu.head<3>();
  next.ang_vel = nu.tail<3>();
  next.position += state.attitude * (next.lin_vel * dt);
  if (!next.ang_vel.isZero(0.0)) {
    next.attitude = (state.attitude * exp_map(next.ang_vel * dt)).normalized();
  }
  return next;
}

double kinetic_energy(const BodyState& state, const RobotParams& p) {
  Vector6d nu;
  nu << state.lin_vel, state.ang_vel;
  return 0.5 * nu.dot(generalized_mass(p) * nu);
}

Eigen::Vector3d angular_momentum_world(const BodyState& state, const RobotParams& p) {
  const Eigen::Matrix3d inertia = p.inertia + p.added_mass.tail<3>().asDiagonal().toDenseMatrix();
  return state.attitude * (inertia * state.ang_vel);
}

Eigen::Vector3d roll_pitch_yaw(const Eigen::Quaterniond& q) {
  const double w = q.w(), x = q.x(), y = q.y(), z = q.z();
  const double roll = std::atan2(2.0 * (w * x + y * z), 1.0 - 2.0 * (x * x + y * y));
  const double pitch = std::asin(std::clamp(2.0 * (w * y - z * x), -1.0, 1.0));
  return {roll, pitch, heading_of(q)};
}

Eigen::Quaterniond from_roll_pitch_yaw(double roll, double pitch, double yaw) {
  return Eigen::Quaterniond(Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ()) *
                            Eigen::AngleAxisd(pitch, Eigen::Vector3d::UnitY()) *
                            Eigen::AngleAxisd(roll, Eigen::Vector3d::UnitX()));
}

double heading_of(const Eigen::Quaterniond& q) {
  const double w = q.w(), x = q.x(), y = q.y(), z = q.z();
  const double yaw = std::atan2(2.0 * (w * z + x * y), 1.0 - 2.0 * (y * y + z * z));
  return yaw <= -std::numbers::pi ? std::numbers::pi : yaw;
}

}  // namespace bactobot
