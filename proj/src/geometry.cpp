#include "bactobot/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bactobot/errors.hpp"

namespace bactobot {

void FrameParams::validate() const {
  if (!(frame_radius > 0.0)) throw ParameterError("frame_radius must be > 0");
  if (!(arm_root_offset > 0.0)) throw ParameterError("arm_root_offset must be > 0");
  for (int p : torque_pairs) {
    if (p < 0 || p >= kPairCount) {
      throw ParameterError("torque pair id " + std::to_string(p) + " outside 0..5");
    }
  }
}

namespace {

std::vector<Eigen::Vector3d> face_normals() {
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  const double norm = std::sqrt(1.0 + phi * phi);
  std::vector<Eigen::Vector3d> normals;
  normals.reserve(kArmCount);
  for (double a : {1.0, -1.0}) {
    for (double b : {phi, -phi}) {
      // cyclic permutations of (0, a, b)
      normals.emplace_back(0.0, a / norm, b / norm);
      normals.emplace_back(a / norm, b / norm, 0.0);
      normals.emplace_back(b / norm, 0.0, a / norm);
    }
  }
  return normals;
}

bool zyx_greater(const Eigen::Vector3d& l, const Eigen::Vector3d& r) {
  if (l.z() != r.z()) return l.z() > r.z();
  if (l.y() != r.y()) return l.y() > r.y();
  return l.x() > r.x();
}

}  // namespace

std::vector<ArmMount> dodecahedron_mounts(const FrameParams& frame) {
  frame.validate();

  auto normals = face_normals();
  std::sort(normals.begin(), normals.end(), zyx_greater);

  std::vector<Eigen::Vector3d> reps;
  for (const auto& n : normals) {
    const bool antipode_taken = std::any_of(reps.begin(), reps.end(), [&](const Eigen::Vector3d& r) {
      return (r + n).squaredNorm() < 1e-20;
    });
    if (!antipode_taken) reps.push_back(n);
  }

  const double radius = frame.frame_radius + frame.arm_root_offset;
  std::vector<ArmMount> mounts(kArmCount);
  for (int i = 0; i < kArmCount; ++i) {
    const int pair = i % kPairCount;
    ArmMount& m = mounts[i];
    m.index = i;
    m.pair_id = pair;
    m.axis = i < kPairCount ? reps[pair] : Eigen::Vector3d(-reps[pair]);
    m.mount_point = radius * m.axis;
    m.handedness = 1;
    const bool reversed = std::find(frame.torque_pairs.begin(), frame.torque_pairs.end(), pair) !=
                          frame.torque_pairs.end();
    m.spin = (reversed && i >= kPairCount) ? -1 : 1;
  }
  return mounts;
}

int pair_of(int index) {
  if (index < 0 || index >= kArmCount) {
    throw ContractViolation("arm index " + std::to_string(index) + " outside 0..11");
  }
  return index % kPairCount;
}

std::array<Eigen::Vector3d, kPairCount> pair_axes(const std::vector<ArmMount>& mounts) {
  std::array<Eigen::Vector3d, kPairCount> axes;
  for (const auto& m : mounts) {
    if (m.index < kPairCount) axes[m.pair_id] = m.axis;
  }
  return axes;
}

}  // namespace bactobot
