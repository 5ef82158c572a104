#pragma once

#include <array>
#include <vector>

#include <Eigen/Core>

namespace bactobot {

inline constexpr int kArmCount = 12;
inline constexpr int kPairCount = 6;

struct FrameParams {
  double frame_radius = 0.15;     // m, hull center to face center
  double arm_root_offset = 0.02;  // m, mount offset beyond the face
  // Pairs whose partner arm is wired with reversed polarity. Such a pair
  // spins both arms the same way in the world frame: thrust cancels and the
  // shaft reaction torques add, giving yaw/pitch authority.
  std::vector<int> torque_pairs = {0, 1};

  void validate() const;
};

/// One flagellar arm on the dodecahedral frame.
///
/// `handedness` is the helix chirality measured along the canonical axis of
/// the arm's pair, so both arms of a pair carry the same sign. `spin` is the
/// shaft rotation sense about `axis` for positive duty.
struct ArmMount {
  int index = 0;
  int pair_id = 0;
  Eigen::Vector3d mount_point = Eigen::Vector3d::Zero();
  Eigen::Vector3d axis = Eigen::Vector3d::UnitZ();
  int handedness = 1;
  int spin = 1;

  /// Chirality about the outward axis (what the helix model consumes).
  int helix_chirality() const { return index < kPairCount ? handedness : -handedness; }
};

/// The 12 arm mounts at the face centers of a regular dodecahedron.
///
/// Axes are the normalized cyclic permutations of (0, +-1, +-phi). Indices
/// 0..5 are the faces sorted by (z, y, x) descending among the upper
/// hemisphere representatives; index i + 6 is the antipode of index i, so the
/// pair representative is always the arm with index < 6.
std::vector<ArmMount> dodecahedron_mounts(const FrameParams& frame);

/// Pair channel driving arm `index`. Throws ContractViolation outside 0..11.
int pair_of(int index);

/// Canonical (representative) axis of each pair.
std::array<Eigen::Vector3d, kPairCount> pair_axes(const std::vector<ArmMount>& mounts);

}  // namespace bactobot
