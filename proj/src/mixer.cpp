#include "bactobot/mixer.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/QR>

#include "bactobot/errors.hpp"

namespace bactobot {

ManeuverCommand ManeuverCommand::clamped() const {
  auto clip = [](double v) { return std::isnan(v) ? 0.0 : std::clamp(v, -1.0, 1.0); };
  return {clip(surge), clip(yaw)};
}

WrenchBody pair_wrench(const std::vector<ArmMount>& mounts, const ThrustModel& model, int pair, double omega) {
  const Eigen::Vector3d zero = Eigen::Vector3d::Zero();
  WrenchBody w;
  for (const auto& m : mounts) {
    if (m.pair_id == pair) w += arm_wrench(m, model, omega, zero, zero);
  }
  return w;
}

WrenchBody steady_wrench(const std::vector<ArmMount>& mounts, const ThrustModel& model,
                         const MotorParams& motor, const PairDuties& duties) {
  WrenchBody w;
  for (int j = 0; j < kPairCount; ++j) w += pair_wrench(mounts, model, j, duties[j] * motor.omega_max);
  return w;
}

namespace {

using Matrix6d = Eigen::Matrix<double, 6, 6>;
using Vector6d = Eigen::Matrix<double, 6, 1>;

std::array<double, kPairCount> solve_normalized(const Matrix6d& columns, const Vector6d& target,
                                                const char* name) {
  Eigen::CompleteOrthogonalDecomposition<Matrix6d> cod(columns);
  cod.setThreshold(1e-10);
  const Vector6d w = cod.solve(target);
  const double residual = (columns * w - target).norm();
  if (residual > 1e-9 * target.norm() || w.cwiseAbs().maxCoeff() == 0.0) {
    std::ostringstream msg;
    msg << "allocation for " << name << " is unreachable: pair wrench matrix has rank "
        << cod.rank() << " of 6 (residual " << residual << ")";
    throw SingularAllocation(static_cast<int>(cod.rank()), msg.str());
  }
  const double scale = w.cwiseAbs().maxCoeff();
  std::array<double, kPairCount> out{};
  for (int j = 0; j < kPairCount; ++j) out[j] = w[j] / scale;
  return out;
}

}  // namespace

AllocationTable build_allocation(const std::vector<ArmMount>& mounts, const ThrustModel& model,
                                 const MotorParams& motor, double omega_ref) {
  motor.validate();
  validate(model);
  if (!(omega_ref > 0.0 && omega_ref <= motor.omega_max)) {
    throw ParameterError("omega_ref must lie in (0, omega_max]");
  }

  AllocationTable table;
  table.omega_ref = omega_ref;
  const double duty_ref = omega_ref / motor.omega_max;

  Matrix6d columns;
  for (int j = 0; j < kPairCount; ++j) {
    const WrenchBody w = pair_wrench(mounts, model, j, omega_ref);
    table.unit_wrenches[j] = (1.0 / duty_ref) * w;
    columns.col(j) << table.unit_wrenches[j].force, table.unit_wrenches[j].torque;
  }

  Vector6d surge = Vector6d::Zero();
  surge[0] = 1.0;
  Vector6d yaw = Vector6d::Zero();
  yaw[5] = 1.0;
  table.surge_weights = solve_normalized(columns, surge, "surge");
  table.yaw_weights = solve_normalized(columns, yaw, "yaw");

  // Flush roundoff so pairs with no authority in a direction get exactly 0.
  for (auto* weights : {&table.surge_weights, &table.yaw_weights}) {
    for (double& v : *weights) {
      if (std::abs(v) < 1e-12) v = 0.0;
    }
  }
  return table;
}

PairDuties mix(const ManeuverCommand& cmd, const AllocationTable& table) {
  const ManeuverCommand c = cmd.clamped();
  std::array<double, kPairCount> duties{};
  for (int j = 0; j < kPairCount; ++j) {
    duties[j] = c.surge * table.surge_weights[j] + c.yaw * table.yaw_weights[j];
  }
  return PairDuties(duties);
}

}  // namespace bactobot
