#include "bactobot/flagella.hpp"

#include <cmath>
#include <numbers>

#include "bactobot/errors.hpp"

namespace bactobot {

void HelixParams::validate() const {
  if (!(helix_radius > 0.0)) throw ParameterError("helix_radius must be > 0");
  if (!(contour_length > 0.0)) throw ParameterError("contour_length must be > 0");
  if (!(pitch_angle > 0.0 && pitch_angle < std::numbers::pi / 2)) {
    throw ParameterError("pitch_angle must lie in (0, pi/2)");
  }
  if (!(drag_tangential > 0.0)) throw ParameterError("drag_tangential must be > 0");
  if (!(drag_normal >= drag_tangential)) {
    throw ParameterError("drag_normal must be >= drag_tangential");
  }
}

void LumpedQuadratic::validate() const {
  if (!(k_thrust > 0.0)) throw ParameterError("k_thrust must be > 0");
  if (!(k_torque > 0.0)) throw ParameterError("k_torque must be > 0");
  if (!(omega_ref > 0.0)) throw ParameterError("omega_ref must be > 0");
}

void validate(const ThrustModel& model) {
  std::visit([](const auto& m) {
    if constexpr (std::is_same_v<std::decay_t<decltype(m)>, ResistiveHelix>) {
      m.helix.validate();
    } else {
      m.validate();
    }
  }, model);
}

// Anisotropic drag integrated along a helix of constant curvature. With
// tangent t = (cos(psi) e_theta + sin(psi) e_z) the segment velocity
// u = U e_z + omega R e_theta has tangential part (U sin psi + omega R cos psi),
// and the load per unit length is -c_n u + (c_n - c_t)(u.t) t. Every term is
// uniform along the arc, so the integral is the length times the local value.
ResistanceMatrix helix_resistance(const HelixParams& h) {
  h.validate();
  const double s = std::sin(h.pitch_angle);
  const double c = std::cos(h.pitch_angle);
  const double len = h.contour_length;
  const double r = h.helix_radius;
  const double cn = h.drag_normal;
  const double ct = h.drag_tangential;

  ResistanceMatrix m;
  m.axial_drag = len * (cn * c * c + ct * s * s);
  m.coupling = len * (cn - ct) * r * s * c;
  m.rotational_drag = len * r * r * (cn * s * s + ct * c * c);
  return m;
}

AxialLoad axial_load(const ThrustModel& model, int chirality, double omega_shaft, double advance) {
  return std::visit([&](const auto& m) -> AxialLoad {
    using M = std::decay_t<decltype(m)>;
    if constexpr (std::is_same_v<M, ResistiveHelix>) {
      const ResistanceMatrix r = helix_resistance(m.helix);
      const double b = chirality * r.coupling;
      return {b * omega_shaft - r.axial_drag * advance, b * advance - r.rotational_drag * omega_shaft};
    } else {
      const double sq = omega_shaft * std::abs(omega_shaft);
      return {chirality * m.k_thrust * sq - m.k_thrust * m.omega_ref * advance, -m.k_torque * sq};
    }
  }, model);
}

WrenchBody arm_wrench(const ArmMount& mount, const ThrustModel& model, double omega,
                      const Eigen::Vector3d& lin_vel, const Eigen::Vector3d& ang_vel) {
  const double advance = (lin_vel + ang_vel.cross(mount.mount_point)).dot(mount.axis);
  const AxialLoad load = axial_load(model, mount.helix_chirality(), mount.spin * omega, advance);

  WrenchBody w;
  w.force = load.force * mount.axis;
  w.torque = mount.mount_point.cross(w.force) + load.torque * mount.axis;
  return w;
}

}  // namespace bactobot
