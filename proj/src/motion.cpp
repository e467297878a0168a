#include "camp/motion.hpp"

#include "camp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

namespace camp {

Eigen::Matrix<double, kAmpFeatureDim, 1> AmpFeature::flatten() const {
  Eigen::Matrix<double, kAmpFeatureDim, 1> v;
  v.segment<12>(0) = joint_positions;
  v.segment<12>(12) = joint_velocities;
  v.segment<3>(24) = base_linear_velocity;
  v.segment<3>(27) = base_angular_velocity;
  v(30) = base_height;
  v.segment<12>(31) = foot_positions;
  return v;
}

AmpFeature AmpFeature::unflatten(const Eigen::Matrix<double, kAmpFeatureDim, 1>& v) {
  AmpFeature f;
  f.joint_positions = v.segment<12>(0);
  f.joint_velocities = v.segment<12>(12);
  f.base_linear_velocity = v.segment<3>(24);
  f.base_angular_velocity = v.segment<3>(27);
  f.base_height = v(30);
  f.foot_positions = v.segment<12>(31);
  return f;
}

namespace {

// Body displacement after time t under constant body-frame velocity (vx, vy)
// and yaw rate wz, starting at the origin with zero heading.
Vec3 body_displacement(const Vec3& cmd, double t) {
  const double vx = cmd.x(), vy = cmd.y(), wz = cmd.z();
  if (std::abs(wz) < 1e-12) return Vec3(vx * t, vy * t, 0.0);
  const double psi = wz * t;
  const double s = std::sin(psi), c = std::cos(psi);
  return Vec3((vx * s + vy * (c - 1.0)) / wz, (-vx * (c - 1.0) + vy * s) / wz, 0.0);
}

// Swing progress profile with zero slope at both ends.
inline double swing_shape(double s) { return s - std::sin(2.0 * M_PI * s) / (2.0 * M_PI); }

// Body-frame foot position of one leg at phase phi, relative to the nominal
// foothold under the hip. Stance sweeps -stride at the anchoring rate; swing
// returns it along a cycloidal path whose end slopes match stance, lifted
// sinusoidally to step_height.
Eigen::Vector2d foot_xy_rel(double phi, double duty, const Eigen::Vector2d& stride) {
  if (phi < duty) {
    return stride * (0.5 - phi / duty);
  }
  const double s = (phi - duty) / (1.0 - duty);
  const double extra = (1.0 - duty) / duty;  // end-slope continuation factor
  const double progress = (1.0 + extra) * swing_shape(s) - extra * s;
  return stride * (-0.5 + progress);
}

double foot_lift(double phi, double duty, double step_height) {
  if (phi < duty) return 0.0;
  const double s = (phi - duty) / (1.0 - duty);
  return step_height * 0.5 * (1.0 - std::cos(2.0 * M_PI * s));
}

}  // namespace

MotionClip generate_clip(const GaitSpec& spec, double duration, double dt, int label,
                         const QuadrupedGeometry& geometry) {
  spec.validate();
  if (!(dt > 0.0)) throw ConfigError("generate_clip: dt must be > 0");
  if (duration < 1.0 / spec.frequency) throw ConfigError("generate_clip: duration shorter than one gait cycle");

  const int n_frames = int(std::lround(duration / dt)) + 1;
  MotionClip clip;
  clip.label = label;
  clip.dt = dt;
  clip.frames.resize(n_frames);

  // stride the foot sweeps during stance; anchoring requires v * duty / f
  const Eigen::Vector2d stride =
      spec.command_velocity.head<2>() * (spec.duty_factor / spec.frequency);

  for (int k = 0; k < n_frames; ++k) {
    const double t = k * dt;
    MotionFrame& fr = clip.frames[k];
    fr.body_position = body_displacement(spec.command_velocity, t) + Vec3(0, 0, spec.body_height);
    const double yaw = spec.command_velocity.z() * t;
    fr.body_orientation = Quat(Eigen::AngleAxisd(yaw, Vec3::UnitZ()));

    for (int leg = 0; leg < kNumLegs; ++leg) {
      const double phi = wrap_unit(spec.frequency * t + spec.phase_offsets[leg]);
      const Vec3& hip = geometry.hip_position[leg];
      const Eigen::Vector2d nominal_xy =
          hip.head<2>() + Eigen::Vector2d(0.0, geometry.links[leg].hip);
      const Eigen::Vector2d xy = nominal_xy + foot_xy_rel(phi, spec.duty_factor, stride);
      const double z = -spec.body_height + foot_lift(phi, spec.duty_factor, spec.step_height);
      const Vec3 foot_body(xy.x(), xy.y(), z);
      fr.foot_positions.row(leg) = foot_body.transpose();
      const Vec3 foot_hip = foot_body - hip;
      fr.joint_positions.segment<3>(3 * leg) =
          leg_inverse_kinematics(foot_hip, geometry.links[leg]);
    }
  }

  // velocities by central differences, one-sided at the ends
  for (int k = 0; k < n_frames; ++k) {
    const int lo = std::max(0, k - 1), hi = std::min(n_frames - 1, k + 1);
    const double span = (hi - lo) * dt;
    clip.frames[k].joint_velocities =
        (clip.frames[hi].joint_positions - clip.frames[lo].joint_positions) / span;
    clip.frames[k].foot_velocities =
        (clip.frames[hi].foot_positions - clip.frames[lo].foot_positions) / span;
  }
  return clip;
}

AmpFeature extract_amp_feature(const MotionFrame& frame, const MotionFrame& prev_frame, double dt) {
  if (!(dt > 0.0)) throw ConfigError("extract_amp_feature: dt must be > 0");
  AmpFeature f;
  f.joint_positions = frame.joint_positions;
  f.joint_velocities = frame.joint_velocities;
  const Vec3 v_world = (frame.body_position - prev_frame.body_position) / dt;
  f.base_linear_velocity = world_to_body(frame.body_orientation, v_world);
  f.base_angular_velocity =
      quat_angular_velocity(prev_frame.body_orientation, frame.body_orientation, dt);
  f.base_height = frame.body_position.z();
  for (int leg = 0; leg < kNumLegs; ++leg) {
    f.foot_positions.segment<3>(3 * leg) = frame.foot_positions.row(leg).transpose();
  }
  return f;
}

std::vector<AmpFeature> amp_features_from_clip(const MotionClip& clip) {
  const int n = int(clip.frames.size());
  if (n < 2) throw DataError("amp_features_from_clip: clip needs at least 2 frames");
  std::vector<AmpFeature> out(n);
  for (int k = 0; k < n; ++k) {
    const int lo = std::max(0, k - 1), hi = std::min(n - 1, k + 1);
    const double span = (hi - lo) * clip.dt;
    const MotionFrame& fr = clip.frames[k];
    AmpFeature f;
    f.joint_positions = fr.joint_positions;
    f.joint_velocities = fr.joint_velocities;
    const Vec3 v_world = (clip.frames[hi].body_position - clip.frames[lo].body_position) / span;
    f.base_linear_velocity = world_to_body(fr.body_orientation, v_world);
    f.base_angular_velocity =
        quat_angular_velocity(clip.frames[lo].body_orientation, clip.frames[hi].body_orientation, span);
    f.base_height = fr.body_position.z();
    for (int leg = 0; leg < kNumLegs; ++leg) {
      f.foot_positions.segment<3>(3 * leg) = fr.foot_positions.row(leg).transpose();
    }
    out[k] = f;
  }
  return out;
}

TransitionBuffer::TransitionBuffer(std::vector<TransitionPair> pairs) : pairs_(std::move(pairs)) {
  for (std::size_t i = 0; i < pairs_.size(); ++i) {
    const int label = pairs_[i].label;
    auto it = std::find(label_values_.begin(), label_values_.end(), label);
    std::size_t slot;
    if (it == label_values_.end()) {
      label_values_.push_back(label);
      label_indices_.emplace_back();
      slot = label_values_.size() - 1;
    } else {
      slot = std::size_t(it - label_values_.begin());
    }
    label_indices_[slot].push_back(std::uint32_t(i));
  }
}

const std::vector<std::uint32_t>& TransitionBuffer::indices_for_label(int label) const {
  static const std::vector<std::uint32_t> empty;
  for (std::size_t i = 0; i < label_values_.size(); ++i) {
    if (label_values_[i] == label) return label_indices_[i];
  }
  return empty;
}

std::vector<int> TransitionBuffer::labels() const {
  std::vector<int> ls = label_values_;
  std::sort(ls.begin(), ls.end());
  return ls;
}

std::vector<TransitionPair> TransitionBuffer::sample(std::size_t batch, std::optional<int> label_filter,
                                                     Rng& rng) const {
  if (batch < 1) throw DataError("sample: batch must be >= 1");
  const std::vector<std::uint32_t>* pool = nullptr;
  std::vector<std::uint32_t> all;
  if (label_filter) {
    pool = &indices_for_label(*label_filter);
    if (pool->empty()) throw DataError("sample: no transitions with requested label");
  } else {
    if (pairs_.empty()) throw DataError("sample: empty transition buffer");
  }
  std::vector<TransitionPair> out;
  out.reserve(batch);
  for (std::size_t i = 0; i < batch; ++i) {
    if (pool) {
      out.push_back(pairs_[(*pool)[rng.index(pool->size())]]);
    } else {
      out.push_back(pairs_[rng.index(pairs_.size())]);
    }
  }
  return out;
}

TransitionBuffer preload_transitions(const std::vector<MotionClip>& clips, std::size_t n_per_clip,
                                     Rng& rng) {
  if (clips.empty()) throw DataError("preload_transitions: empty clip list");
  std::vector<TransitionPair> pairs;
  pairs.reserve(clips.size() * n_per_clip);
  for (const MotionClip& clip : clips) {
    if (clip.frames.size() < 2) throw DataError("preload_transitions: clip with fewer than 2 frames");
    const std::vector<AmpFeature> feats = amp_features_from_clip(clip);
    const std::size_t n_starts = feats.size() - 1;
    for (std::size_t i = 0; i < n_per_clip; ++i) {
      const std::size_t k = rng.index(n_starts);
      pairs.push_back(TransitionPair{feats[k], feats[k + 1], clip.label});
    }
  }
  return TransitionBuffer(std::move(pairs));
}

// --- clip store --------------------------------------------------------------

namespace {
constexpr char kClipMagic[8] = {'C', 'A', 'M', 'P', 'C', 'L', 'P', '1'};

void put_doubles(std::ostream& os, const double* p, std::size_t n) {
  os.write(reinterpret_cast<const char*>(p), std::streamsize(n * sizeof(double)));
}

void get_doubles(std::istream& is, double* p, std::size_t n) {
  is.read(reinterpret_cast<char*>(p), std::streamsize(n * sizeof(double)));
}
}  // namespace

void write_clip(const std::filesystem::path& path, const MotionClip& clip) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("write_clip: cannot open " + path.string());
  os.write(kClipMagic, sizeof(kClipMagic));
  const std::uint32_t label = std::uint32_t(clip.label);
  os.write(reinterpret_cast<const char*>(&label), sizeof(label));
  os.write(reinterpret_cast<const char*>(&clip.dt), sizeof(clip.dt));
  const std::uint64_t n = clip.frames.size();
  os.write(reinterpret_cast<const char*>(&n), sizeof(n));
  for (const MotionFrame& fr : clip.frames) {
    put_doubles(os, fr.body_position.data(), 3);
    const double q[4] = {fr.body_orientation.w(), fr.body_orientation.x(), fr.body_orientation.y(),
                         fr.body_orientation.z()};
    put_doubles(os, q, 4);
    put_doubles(os, fr.joint_positions.data(), 12);
    put_doubles(os, fr.joint_velocities.data(), 12);
    Eigen::Matrix<double, kNumLegs, 3, Eigen::RowMajor> fp = fr.foot_positions;
    Eigen::Matrix<double, kNumLegs, 3, Eigen::RowMajor> fv = fr.foot_velocities;
    put_doubles(os, fp.data(), 12);
    put_doubles(os, fv.data(), 12);
  }
  if (!os) throw DataError("write_clip: write failed for " + path.string());
}

MotionClip read_clip(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("read_clip: cannot open " + path.string());
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kClipMagic, sizeof(magic)) != 0) {
    throw DataError("read_clip: bad magic in " + path.string());
  }
  MotionClip clip;
  std::uint32_t label = 0;
  std::uint64_t n = 0;
  is.read(reinterpret_cast<char*>(&label), sizeof(label));
  is.read(reinterpret_cast<char*>(&clip.dt), sizeof(clip.dt));
  is.read(reinterpret_cast<char*>(&n), sizeof(n));
  clip.label = int(label);
  clip.frames.resize(n);
  for (MotionFrame& fr : clip.frames) {
    get_doubles(is, fr.body_position.data(), 3);
    double q[4];
    get_doubles(is, q, 4);
    fr.body_orientation = Quat(q[0], q[1], q[2], q[3]);
    get_doubles(is, fr.joint_positions.data(), 12);
    get_doubles(is, fr.joint_velocities.data(), 12);
    Eigen::Matrix<double, kNumLegs, 3, Eigen::RowMajor> fp, fv;
    get_doubles(is, fp.data(), 12);
    get_doubles(is, fv.data(), 12);
    fr.foot_positions = fp;
    fr.foot_velocities = fv;
  }
  if (!is) throw DataError("read_clip: truncated file " + path.string());
  return clip;
}

}  // namespace camp
