#pragma once

#include "camp/types.hpp"

#include <array>

namespace camp {

// Signed hip offset plus the two planar link lengths of a 3-DOF leg.
// `hip` is signed: positive for left legs, negative for right legs.
struct LegLinkLengths {
  double hip = 0.0;
  double thigh = 0.213;
  double calf = 0.213;
};

// Joint angles are (abduction, hip pitch, knee), zero = leg extended straight
// down, knee bending backward (negative knee angles).
Vec3 leg_forward_kinematics(const Vec3& joints, const LegLinkLengths& links);

// Inverse of leg_forward_kinematics. Throws UnreachableTargetError when the
// target lies outside the reach annulus; never clamps silently.
Vec3 leg_inverse_kinematics(const Vec3& foot_pos_hip_frame, const LegLinkLengths& links);

// Kinematic layout of the quadruped: hip mount points in the base frame and
// per-leg link lengths. Leg order FL, FR, RL, RR.
struct QuadrupedGeometry {
  std::array<Vec3, kNumLegs> hip_position;
  std::array<LegLinkLengths, kNumLegs> links;

  static QuadrupedGeometry default_geometry();

  // Foot position in the base frame for one leg.
  Vec3 foot_position_base(int leg, const Vec3& joints) const;

  // All four feet from a stacked 12-joint vector (leg-major).
  Eigen::Matrix<double, kNumLegs, 3> feet_base(const JointVec& joints) const;

  // Joint angles putting every foot directly under its hip at ground level
  // for the given standing height.
  JointVec standing_pose(double body_height) const;
};

}  // namespace camp
