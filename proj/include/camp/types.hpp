#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <cstdint>
#include <vector>

namespace camp {

using Scalar = double;
using Vec3 = Eigen::Vector3d;
using Quat = Eigen::Quaterniond;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

inline constexpr int kNumLegs = 4;
inline constexpr int kJointsPerLeg = 3;
inline constexpr int kNumJoints = kNumLegs * kJointsPerLeg;

// Leg ordering used everywhere: front-left, front-right, rear-left, rear-right.
enum class Leg : int { FL = 0, FR = 1, RL = 2, RR = 3 };

inline constexpr const char* kLegNames[kNumLegs] = {"FL", "FR", "RL", "RR"};

inline constexpr double kGravity = 9.81;

using JointVec = Eigen::Matrix<double, kNumJoints, 1>;

// Rotates a world-frame vector into the body frame of `orientation`.
inline Vec3 world_to_body(const Quat& orientation, const Vec3& v_world) {
  return orientation.conjugate() * v_world;
}

inline Vec3 body_to_world(const Quat& orientation, const Vec3& v_body) {
  return orientation * v_body;
}

// Roll/pitch/yaw (ZYX convention) from a unit quaternion.
inline Vec3 quat_to_rpy(const Quat& q) {
  Vec3 rpy;
  const double sinr_cosp = 2.0 * (q.w() * q.x() + q.y() * q.z());
  const double cosr_cosp = 1.0 - 2.0 * (q.x() * q.x() + q.y() * q.y());
  rpy.x() = std::atan2(sinr_cosp, cosr_cosp);
  const double sinp = 2.0 * (q.w() * q.y() - q.z() * q.x());
  rpy.y() = std::abs(sinp) >= 1.0 ? std::copysign(M_PI / 2.0, sinp) : std::asin(sinp);
  const double siny_cosp = 2.0 * (q.w() * q.z() + q.x() * q.y());
  const double cosy_cosp = 1.0 - 2.0 * (q.y() * q.y() + q.z() * q.z());
  rpy.z() = std::atan2(siny_cosp, cosy_cosp);
  return rpy;
}

// Integrates a unit quaternion by a body-frame angular velocity over dt.
inline Quat integrate_quat(const Quat& q, const Vec3& omega_body, double dt) {
  const Vec3 half = 0.5 * omega_body * dt;
  const double angle = half.norm();
  Quat dq;
  if (angle < 1e-12) {
    dq = Quat(1.0, half.x(), half.y(), half.z());
  } else {
    const Vec3 axis = half / angle;
    dq = Quat(Eigen::AngleAxisd(2.0 * angle * 0.5, axis));
  }
  Quat out = (q * dq).normalized();
  return out;
}

// Body-frame angular velocity that rotates q_prev into q_cur over dt (log map).
inline Vec3 quat_angular_velocity(const Quat& q_prev, const Quat& q_cur, double dt) {
  Quat dq = (q_prev.conjugate() * q_cur).normalized();
  if (dq.w() < 0.0) dq.coeffs() *= -1.0;
  const Vec3 v(dq.x(), dq.y(), dq.z());
  const double s = v.norm();
  if (s < 1e-14) return Vec3::Zero();
  const double angle = 2.0 * std::atan2(s, dq.w());
  return (angle / (s * dt)) * v;
}

// Circular distance between two phases in [0,1): result in [0, 0.5].
inline double circular_distance(double a, double b) {
  double d = std::abs(a - b);
  d -= std::floor(d);
  return std::min(d, 1.0 - d);
}

inline double wrap_unit(double x) { return x - std::floor(x); }

}  // namespace camp
