#pragma once

#include <variant>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "bactobot/geometry.hpp"

namespace bactobot {

/// Geometry and drag anisotropy of a deformed flagellum held as a steady helix.
struct HelixParams {
  double helix_radius = 0.02;      // m
  double pitch_angle = 0.6;        // rad, tangent elevation above the plane normal to the axis
  double contour_length = 0.15;    // m
  double drag_normal = 2.0;        // N s / m^2
  double drag_tangential = 1.0;    // N s / m^2

  void validate() const;
};

/// Linear map (U, omega) -> (F, tau) of a right-handed helix:
///   F   = B*omega - A*U
///   tau = B*U     - C*omega
struct ResistanceMatrix {
  double axial_drag = 0.0;        // A, N s / m
  double coupling = 0.0;          // B, N s
  double rotational_drag = 0.0;   // C, N m s

  double determinant() const { return axial_drag * rotational_drag - coupling * coupling; }
};

ResistanceMatrix helix_resistance(const HelixParams& h);

struct ResistiveHelix {
  HelixParams helix;
};

/// Propeller-like law: F = k_t*w|w| - k_t*omega_ref*U, tau = -k_q*w|w|.
struct LumpedQuadratic {
  double k_thrust = 1e-4;     // N s^2 / rad^2
  double k_torque = 1e-5;     // N m s^2 / rad^2
  double omega_ref = 22.0;    // rad/s, sets the advance-speed drag k_thrust*omega_ref

  void validate() const;
};

using ThrustModel = std::variant<ResistiveHelix, LumpedQuadratic>;

void validate(const ThrustModel& model);

struct WrenchBody {
  Eigen::Vector3d force = Eigen::Vector3d::Zero();   // N, body frame
  Eigen::Vector3d torque = Eigen::Vector3d::Zero();  // N m, body frame, about the CoM

  WrenchBody& operator+=(const WrenchBody& o) {
    force += o.force;
    torque += o.torque;
    return *this;
  }
  friend WrenchBody operator+(WrenchBody a, const WrenchBody& b) { return a += b; }
  friend WrenchBody operator*(double s, const WrenchBody& w) { return {s * w.force, s * w.torque}; }
  bool allFinite() const { return force.allFinite() && torque.allFinite(); }
};

/// Scalar axial load of one arm in its own frame (along its outward axis).
struct AxialLoad {
  double force = 0.0;   // N, along axis
  double torque = 0.0;  // N m, about axis, transmitted to the hull
};

/// Axial load for a shaft speed `omega_shaft` about the outward axis,
/// advance speed `advance` along it, and helix chirality `chirality`.
AxialLoad axial_load(const ThrustModel& model, int chirality, double omega_shaft, double advance);

/// Wrench on the hull from one arm whose motor runs at `omega` (signed by
/// duty; the mount's `spin` maps it onto the shaft). `lin_vel` / `ang_vel`
/// are the body-frame hull velocities.
WrenchBody arm_wrench(const ArmMount& mount, const ThrustModel& model, double omega,
                      const Eigen::Vector3d& lin_vel, const Eigen::Vector3d& ang_vel);

}  // namespace bactobot
