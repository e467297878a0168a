#include "camp/kinematics.hpp"

#include "camp/errors.hpp"

#include <cmath>
#include <sstream>

namespace camp {

namespace {
constexpr double kReachTol = 1e-12;

double clamp_unit(double x) { return std::min(1.0, std::max(-1.0, x)); }
}  // namespace

Vec3 leg_forward_kinematics(const Vec3& joints, const LegLinkLengths& links) {
  const double q1 = joints[0], q2 = joints[1], q3 = joints[2];
  // planar chain in the abducted frame
  const double x = -links.thigh * std::sin(q2) - links.calf * std::sin(q2 + q3);
  const double z = -links.thigh * std::cos(q2) - links.calf * std::cos(q2 + q3);
  const Vec3 foot_abducted(x, links.hip, z);
  const double c = std::cos(q1), s = std::sin(q1);
  return Vec3(foot_abducted.x(),
              c * foot_abducted.y() - s * foot_abducted.z(),
              s * foot_abducted.y() + c * foot_abducted.z());
}

Vec3 leg_inverse_kinematics(const Vec3& p, const LegLinkLengths& links) {
  const double lt = links.thigh, lc = links.calf, d = links.hip;
  const double r_yz_sq = p.y() * p.y() + p.z() * p.z();
  const double w_sq = r_yz_sq - d * d;
  if (w_sq < -kReachTol) {
    std::ostringstream msg;
    msg << "leg target (" << p.transpose() << ") inside the hip cylinder (|d|=" << std::abs(d) << ")";
    throw UnreachableTargetError(msg.str());
  }
  const double w = std::sqrt(std::max(0.0, w_sq));

  // abduction: rotate (y,z) back so the chain lies at (d, -w)
  const double q1 = std::atan2(p.z(), p.y()) - std::atan2(-w, d);

  const double r_sq = p.x() * p.x() + w_sq;
  const double r = std::sqrt(r_sq);
  const double reach_max = lt + lc;
  const double reach_min = std::abs(lt - lc);
  if (r > reach_max + kReachTol || r < reach_min - kReachTol) {
    std::ostringstream msg;
    msg << "leg target at planar distance " << r << " outside reach annulus [" << reach_min << ", "
        << reach_max << "]";
    throw UnreachableTargetError(msg.str());
  }

  // knee interior angle via law of cosines; knee bends backward (q3 <= 0)
  const double cos_beta = clamp_unit((lt * lt + lc * lc - r_sq) / (2.0 * lt * lc));
  const double q3 = std::acos(cos_beta) - M_PI;

  const double eta = std::atan2(-p.x(), w);  // hip-to-foot direction from straight down
  const double cos_alpha = clamp_unit((lt * lt + r_sq - lc * lc) / (2.0 * lt * r));
  const double q2 = eta + std::acos(cos_alpha);

  // wrap q1 into (-pi, pi]
  double a = q1;
  while (a > M_PI) a -= 2.0 * M_PI;
  while (a <= -M_PI) a += 2.0 * M_PI;
  return Vec3(a, q2, q3);
}

QuadrupedGeometry QuadrupedGeometry::default_geometry() {
  QuadrupedGeometry g;
  const double lx = 0.1934, ly = 0.0465, hip = 0.0955;
  g.hip_position = {Vec3(lx, ly, 0.0), Vec3(lx, -ly, 0.0), Vec3(-lx, ly, 0.0), Vec3(-lx, -ly, 0.0)};
  for (int leg = 0; leg < kNumLegs; ++leg) {
    const double side = (leg % 2 == 0) ? 1.0 : -1.0;  // FL, RL left
    g.links[leg] = LegLinkLengths{side * hip, 0.213, 0.213};
  }
  return g;
}

Vec3 QuadrupedGeometry::foot_position_base(int leg, const Vec3& joints) const {
  return hip_position[leg] + leg_forward_kinematics(joints, links[leg]);
}

Eigen::Matrix<double, kNumLegs, 3> QuadrupedGeometry::feet_base(const JointVec& joints) const {
  Eigen::Matrix<double, kNumLegs, 3> feet;
  for (int leg = 0; leg < kNumLegs; ++leg) {
    feet.row(leg) = foot_position_base(leg, joints.segment<3>(3 * leg)).transpose();
  }
  return feet;
}

JointVec QuadrupedGeometry::standing_pose(double body_height) const {
  JointVec q;
  for (int leg = 0; leg < kNumLegs; ++leg) {
    const Vec3 target(0.0, links[leg].hip, -body_height);
    q.segment<3>(3 * leg) = leg_inverse_kinematics(target, links[leg]);
  }
  return q;
}

}  // namespace camp
