#pragma once

#include "camp/gait.hpp"
#include "camp/kinematics.hpp"
#include "camp/rng.hpp"
#include "camp/types.hpp"

#include <filesystem>
#include <optional>
#include <vector>

namespace camp {

struct MotionFrame {
  Vec3 body_position = Vec3::Zero();
  Quat body_orientation = Quat::Identity();
  JointVec joint_positions = JointVec::Zero();
  JointVec joint_velocities = JointVec::Zero();
  Eigen::Matrix<double, kNumLegs, 3> foot_positions =
      Eigen::Matrix<double, kNumLegs, 3>::Zero();  // body frame
  Eigen::Matrix<double, kNumLegs, 3> foot_velocities =
      Eigen::Matrix<double, kNumLegs, 3>::Zero();  // body frame
};

struct MotionClip {
  int label = 0;   // skill index in the catalog that produced it
  double dt = 0.02;
  std::vector<MotionFrame> frames;

  double duration() const { return frames.empty() ? 0.0 : dt * double(frames.size() - 1); }
};

inline constexpr int kAmpFeatureDim = 43;

// The discriminator observation: 12 joint positions, 12 joint velocities,
// base linear velocity (3), base angular velocity (3), base height (1) and
// 12 body-frame foot positions, flattened in exactly this order.
struct AmpFeature {
  JointVec joint_positions = JointVec::Zero();
  JointVec joint_velocities = JointVec::Zero();
  Vec3 base_linear_velocity = Vec3::Zero();   // body frame
  Vec3 base_angular_velocity = Vec3::Zero();  // body frame
  double base_height = 0.0;
  JointVec foot_positions = JointVec::Zero();  // body frame, leg-major xyz

  Eigen::Matrix<double, kAmpFeatureDim, 1> flatten() const;
  static AmpFeature unflatten(const Eigen::Matrix<double, kAmpFeatureDim, 1>& v);
};

// Kinematically consistent periodic gait clip: stance feet anchored to the
// ground plane, cycloidal swing with sinusoidal lift, joints from leg IK,
// velocities by central finite differences (one-sided at the ends).
MotionClip generate_clip(const GaitSpec& spec, double duration, double dt, int label = 0,
                         const QuadrupedGeometry& geometry = QuadrupedGeometry::default_geometry());

// Feature for `frame`, velocities by forward difference against `prev_frame`.
AmpFeature extract_amp_feature(const MotionFrame& frame, const MotionFrame& prev_frame, double dt);

// Per-frame features of a whole clip, base velocities by central differences
// (matching the clip's stored joint/foot velocity convention).
std::vector<AmpFeature> amp_features_from_clip(const MotionClip& clip);

struct TransitionPair {
  AmpFeature s_t;
  AmpFeature s_next;
  int label = 0;
};

// Expert transitions preloaded in memory; per-label index lists partition the
// buffer. Immutable after construction, safe to share across threads.
class TransitionBuffer {
 public:
  TransitionBuffer() = default;
  explicit TransitionBuffer(std::vector<TransitionPair> pairs);

  std::size_t size() const { return pairs_.size(); }
  const TransitionPair& pair(std::size_t i) const { return pairs_[i]; }
  const std::vector<std::uint32_t>& indices_for_label(int label) const;
  std::vector<int> labels() const;

  // i.i.d. uniform draws, optionally restricted to one skill label.
  std::vector<TransitionPair> sample(std::size_t batch, std::optional<int> label_filter,
                                     Rng& rng) const;

 private:
  std::vector<TransitionPair> pairs_;
  std::vector<int> label_values_;
  std::vector<std::vector<std::uint32_t>> label_indices_;
};

// Uniformly samples n_per_clip consecutive-frame pairs from each clip,
// labeled with the clip's skill index.
TransitionBuffer preload_transitions(const std::vector<MotionClip>& clips, std::size_t n_per_clip,
                                     Rng& rng);

// --- clip store ------------------------------------------------------------
// One binary file per clip (see docs/formats.md for the byte layout).

void write_clip(const std::filesystem::path& path, const MotionClip& clip);
MotionClip read_clip(const std::filesystem::path& path);

}  // namespace camp
