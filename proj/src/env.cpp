#include "camp/env.hpp"

#include "camp/errors.hpp"

#include <cmath>
#include <future>
#include <sstream>

namespace camp {

RobotModel RobotModel::default_model() {
  RobotModel m;
  m.link_masses = VecX(13);
  m.link_masses << 6.0,                    // base
      0.6, 1.0, 0.25, 0.6, 1.0, 0.25,      // FL, FR (hip, thigh, calf)
      0.6, 1.0, 0.25, 0.6, 1.0, 0.25;      // RL, RR
  m.nominal_joint_positions = m.geometry.standing_pose(m.body_height);
  return m;
}

void RobotModel::validate() const {
  if ((link_masses.array() <= 0.0).any()) throw ConfigError("RobotModel: masses must be > 0");
  for (const auto& l : geometry.links) {
    if (l.thigh <= 0.0 || l.calf <= 0.0) throw ConfigError("RobotModel: link lengths must be > 0");
  }
}

PdParams PdParams::default_params(const RobotModel& model) {
  PdParams pd;
  for (int leg = 0; leg < kNumLegs; ++leg) {
    pd.kp[3 * leg + 0] = 30.0;
    pd.kp[3 * leg + 1] = 30.0;
    pd.kp[3 * leg + 2] = 40.0;  // calf
  }
  pd.kd.setConstant(1.0);
  pd.torque_limit = model.torque_limits;
  return pd;
}

JointVec pd_torque(const JointVec& theta_target, const JointVec& theta, const JointVec& theta_dot,
                   const PdParams& pd) {
  JointVec tau = pd.kp.cwiseProduct(theta_target - theta) - pd.kd.cwiseProduct(theta_dot);
  return tau.cwiseMax(-pd.torque_limit).cwiseMin(pd.torque_limit);
}

DomainRandomizationConfig DomainRandomizationConfig::disabled() {
  DomainRandomizationConfig c;
  c.enabled = false;
  return c;
}

Command Command::for_skill(int skill_index, int num_skills, const Vec3& velocity) {
  if (skill_index < 0 || skill_index >= num_skills) throw ConfigError("Command: skill index out of range");
  Command c;
  c.velocity = velocity;
  c.skill_onehot = VecX::Zero(num_skills);
  c.skill_onehot(skill_index) = 1.0;
  c.skill_index = skill_index;
  return c;
}

void EnvConfig::validate() const {
  model.validate();
  if (control_dt <= 0.0 || substeps < 1) throw ConfigError("EnvConfig: bad control_dt/substeps");
  if (actuator_lag <= 0.0) throw ConfigError("EnvConfig: actuator_lag must be > 0");
}

QuadrupedEnv::QuadrupedEnv(EnvConfig cfg, std::uint64_t root_seed, int env_index)
    : cfg_(std::move(cfg)), pd_eff_(cfg_.pd), rng_(Rng::derive(root_seed, std::uint64_t(env_index))),
      env_index_(env_index) {
  cfg_.validate();
  reset();
}

void QuadrupedEnv::reseed(std::uint64_t root_seed, int env_index) {
  rng_ = Rng::derive(root_seed, std::uint64_t(env_index));
  env_index_ = env_index;
}

void QuadrupedEnv::apply_randomization() {
  SampledRandomization& r = state_.randomization;
  const DomainRandomizationConfig& c = cfg_.randomization;
  const Eigen::Index n_links = cfg_.model.link_masses.size();
  r.link_mass_scale = VecX::Ones(n_links);
  if (c.enabled) {
    for (Eigen::Index i = 0; i < n_links; ++i) {
      r.link_mass_scale(i) = rng_.uniform(c.link_mass_scale[0], c.link_mass_scale[1]);
    }
    r.payload_mass = rng_.uniform(c.payload_mass[0], c.payload_mass[1]);
    r.payload_position = rng_.uniform(c.payload_position[0], c.payload_position[1]);
    r.ground_friction = rng_.uniform(c.ground_friction[0], c.ground_friction[1]);
    r.motor_strength_scale = rng_.uniform(c.motor_strength_scale[0], c.motor_strength_scale[1]);
    r.joint_kp = rng_.uniform(c.joint_kp[0], c.joint_kp[1]);
    r.joint_kd = rng_.uniform(c.joint_kd[0], c.joint_kd[1]);
    for (int j = 0; j < kNumJoints; ++j) {
      r.initial_joint_scale[j] = rng_.uniform(c.initial_joint_scale[0], c.initial_joint_scale[1]);
    }
  } else {
    r.payload_mass = 0.0;
    r.payload_position = 0.0;
    r.ground_friction = 1.0;
    r.motor_strength_scale = 1.0;
    r.joint_kp = 20.0;
    r.joint_kd = 0.5;
    r.initial_joint_scale.setOnes();
  }

  pd_eff_ = cfg_.pd;
  pd_eff_.kp *= r.joint_kp / 20.0;
  pd_eff_.kd *= r.joint_kd / 0.5;
  pd_eff_.torque_limit = cfg_.model.torque_limits * r.motor_strength_scale;

  const double nominal_mass = cfg_.model.total_mass();
  const double actual_mass =
      cfg_.model.link_masses.cwiseProduct(r.link_mass_scale).sum() + r.payload_mass;
  mass_factor_ = actual_mass / nominal_mass;
  attitude_eq_pitch_ = -cfg_.payload_attitude_gain * r.payload_mass * r.payload_position;
}

void QuadrupedEnv::reset() {
  state_ = EnvState{};
  apply_randomization();
  state_.joint_positions =
      cfg_.model.nominal_joint_positions.cwiseProduct(state_.randomization.initial_joint_scale);
  state_.joint_velocities.setZero();
  state_.actuator_torque.setZero();
  // stand with the lowest foot exactly on the ground plane
  const auto feet = cfg_.model.geometry.feet_base(state_.joint_positions);
  state_.base_position = Vec3(0.0, 0.0, -feet.col(2).minCoeff());
  state_.base_orientation = Quat::Identity();
  state_.time = 0.0;
  state_.terminated = false;
  update_contacts();
}

JointVec QuadrupedEnv::apply_action(const JointVec& action) const {
  return cfg_.model.nominal_joint_positions + cfg_.pd.action_scale * action;
}

Eigen::Matrix<double, kNumLegs, 3> QuadrupedEnv::feet_body() const {
  return cfg_.model.geometry.feet_base(state_.joint_positions);
}

void QuadrupedEnv::update_contacts() {
  const auto feet = feet_body();
  const Eigen::Matrix3d rot = state_.base_orientation.toRotationMatrix();
  for (int leg = 0; leg < kNumLegs; ++leg) {
    const Vec3 world = state_.base_position + rot * feet.row(leg).transpose();
    state_.contacts[leg] = world.z() <= 1e-9;
  }
}

void QuadrupedEnv::substep(const JointVec& theta_target, double dts) {
  const auto feet_before = feet_body();
  // joints: PD torque through actuator lag, semi-implicit Euler
  const JointVec tau_cmd =
      pd_torque(theta_target, state_.joint_positions, state_.joint_velocities, pd_eff_);
  const double lag_mix = 1.0 - std::exp(-dts / cfg_.actuator_lag);
  state_.actuator_torque += lag_mix * (tau_cmd - state_.actuator_torque);
  const JointVec qdd =
      (state_.actuator_torque - cfg_.model.joint_viscous_friction * state_.joint_velocities)
          .cwiseQuotient(cfg_.model.joint_inertia);
  state_.joint_velocities += qdd * dts;
  state_.joint_positions += state_.joint_velocities * dts;

  const auto feet_after = feet_body();
  update_contacts();
  const bool supported =
      state_.contacts[0] || state_.contacts[1] || state_.contacts[2] || state_.contacts[3];

  const Eigen::Matrix3d rot = state_.base_orientation.toRotationMatrix();
  Vec3 rpy = quat_to_rpy(state_.base_orientation);
  Vec3 v_body = rot.transpose() * state_.base_lin_velocity;

  if (supported) {
    const double mu = state_.randomization.ground_friction;
    const double accel_cap = mu * kGravity;
    const double tau_track = cfg_.base_tracking_tau * mass_factor_;

    // horizontal: anchored stance feet act as a conveyor; the base can only
    // move as fast as the stance legs sweep backward, so velocity commands
    // are reachable solely through leg motion
    Eigen::Vector2d sweep = Eigen::Vector2d::Zero();
    int n_stance = 0;
    for (int leg = 0; leg < kNumLegs; ++leg) {
      if (state_.contacts[leg]) {
        sweep -= (feet_after.row(leg).head<2>() - feet_before.row(leg).head<2>()).transpose() / dts;
        ++n_stance;
      }
    }
    Eigen::Vector2d v_traction = Eigen::Vector2d::Zero();
    if (n_stance > 0) {
      v_traction = sweep / double(n_stance);
      const double cap = cfg_.max_traction_speed;
      const double n = v_traction.norm();
      if (n > cap) v_traction *= cap / n;
    }
    Eigen::Vector2d a_xy = (v_traction - v_body.head<2>()) / tau_track;
    const double a_norm = a_xy.norm();
    if (a_norm > accel_cap) a_xy *= accel_cap / a_norm;
    v_body.head<2>() += a_xy * dts;

    // vertical: critically damped spring to the stance-kinematic height
    const auto feet = feet_body();
    double z_sum = 0.0;
    int n_contact = 0;
    for (int leg = 0; leg < kNumLegs; ++leg) {
      if (state_.contacts[leg]) {
        z_sum += (rot * feet.row(leg).transpose()).z();
        ++n_contact;
      }
    }
    const double z_des = -z_sum / double(n_contact);
    const double wh = cfg_.height_stiffness_omega;
    double vz = state_.base_lin_velocity.z();
    vz += (wh * wh * (z_des - state_.base_position.z()) - 2.0 * wh * vz) * dts;

    // yaw: friction-limited tracking; roll/pitch: spring to equilibrium
    const double yaw_cap = accel_cap / 0.15;
    double a_yaw = (command_velocity_.z() - state_.base_ang_velocity.z()) / tau_track;
    a_yaw = std::clamp(a_yaw, -yaw_cap, yaw_cap);
    state_.base_ang_velocity.z() += a_yaw * dts;
    const double wa = cfg_.attitude_stiffness_omega;
    const Eigen::Vector2d att_eq(0.0, attitude_eq_pitch_);
    for (int axis = 0; axis < 2; ++axis) {
      const double acc =
          wa * wa * (att_eq[axis] - rpy[axis]) - 2.0 * wa * state_.base_ang_velocity[axis];
      state_.base_ang_velocity[axis] += acc * dts;
    }

    const Eigen::Vector2d v_world_xy =
        Eigen::Rotation2Dd(rpy.z()).toRotationMatrix() * v_body.head<2>();
    state_.base_lin_velocity << v_world_xy.x(), v_world_xy.y(), vz;
  } else {
    state_.base_lin_velocity.z() -= kGravity * dts;  // ballistic
  }

  state_.base_position += state_.base_lin_velocity * dts;
  state_.base_orientation = integrate_quat(state_.base_orientation, state_.base_ang_velocity, dts);
  update_contacts();
}

void QuadrupedEnv::check_termination() {
  const Vec3 rpy = quat_to_rpy(state_.base_orientation);
  const bool fell =
      state_.base_position.z() < cfg_.height_termination_fraction * cfg_.model.body_height;
  const bool tilted = std::abs(rpy.x()) > cfg_.tilt_termination || std::abs(rpy.y()) > cfg_.tilt_termination;
  if (fell || tilted) state_.terminated = true;
}

QuadrupedEnv::StepResult QuadrupedEnv::step(const JointVec& action) {
  if (!action.allFinite()) throw NumericError("QuadrupedEnv::step: non-finite action");
  return step_with_targets(apply_action(action));
}

QuadrupedEnv::StepResult QuadrupedEnv::step_with_targets(const JointVec& theta_target) {
  if (!theta_target.allFinite()) throw NumericError("QuadrupedEnv::step: non-finite joint target");
  const double dts = cfg_.control_dt / double(cfg_.substeps);
  for (int s = 0; s < cfg_.substeps; ++s) substep(theta_target, dts);
  state_.time += cfg_.control_dt;
  check_termination();
  StepResult res;
  res.feature = amp_feature();
  res.contacts = state_.contacts;
  res.terminated = state_.terminated;
  return res;
}

AmpFeature QuadrupedEnv::amp_feature() const {
  AmpFeature f;
  f.joint_positions = state_.joint_positions;
  f.joint_velocities = state_.joint_velocities;
  f.base_linear_velocity = world_to_body(state_.base_orientation, state_.base_lin_velocity);
  f.base_angular_velocity = state_.base_ang_velocity;
  f.base_height = state_.base_position.z();
  const auto feet = feet_body();
  for (int leg = 0; leg < kNumLegs; ++leg) {
    f.foot_positions.segment<3>(3 * leg) = feet.row(leg).transpose();
  }
  return f;
}

VecX build_observation(const EnvState& state, const Command& command, const JointVec& prev_action) {
  const Eigen::Index l = command.skill_onehot.size();
  VecX obs(kObservationBaseDim + l);
  Eigen::Index o = 0;
  obs.segment<3>(o) = state.base_ang_velocity;
  o += 3;
  obs.segment<3>(o) = world_to_body(state.base_orientation, Vec3(0, 0, -1));
  o += 3;
  obs.segment<3>(o) = command.velocity;
  o += 3;
  obs.segment(o, l) = command.skill_onehot;
  o += l;
  obs.segment<12>(o) = state.joint_positions;
  o += 12;
  obs.segment<12>(o) = state.joint_velocities;
  o += 12;
  obs.segment<12>(o) = prev_action;
  return obs;
}

VecX build_privileged(const EnvState& state, const Command& command) {
  (void)command;
  VecX x(kPrivilegedDim);
  x.segment<3>(0) = world_to_body(state.base_orientation, state.base_lin_velocity);
  for (int leg = 0; leg < kNumLegs; ++leg) x(3 + leg) = state.contacts[leg] ? 1.0 : 0.0;
  x(7) = state.randomization.ground_friction;
  x(8) = state.randomization.payload_mass;
  return x;
}

double task_reward(const EnvState& state, const Command& command) {
  const Vec3 v_body = world_to_body(state.base_orientation, state.base_lin_velocity);
  const double lin_err = (command.velocity.head<2>() - v_body.head<2>()).norm();
  const double ang_err = std::abs(command.velocity.z() - state.base_ang_velocity.z());
  return 1.5 * std::exp(-lin_err / 0.15) + 0.75 * std::exp(-ang_err / 0.15);
}

VecX QuadrupedEnv::observation(const Command& command, const JointVec& prev_action) const {
  return build_observation(state_, command, prev_action);
}

VecX QuadrupedEnv::privileged_observation(const Command& command) const {
  return build_privileged(state_, command);
}

double QuadrupedEnv::task_reward(const Command& command) const {
  return camp::task_reward(state_, command);
}

std::string QuadrupedEnv::serialize_state() const {
  std::ostringstream os;
  os.precision(17);
  auto put = [&os](const double* p, Eigen::Index n) {
    for (Eigen::Index i = 0; i < n; ++i) os << p[i] << " ";
  };
  put(state_.base_position.data(), 3);
  const double q[4] = {state_.base_orientation.w(), state_.base_orientation.x(),
                       state_.base_orientation.y(), state_.base_orientation.z()};
  put(q, 4);
  put(state_.base_lin_velocity.data(), 3);
  put(state_.base_ang_velocity.data(), 3);
  put(state_.joint_positions.data(), 12);
  put(state_.joint_velocities.data(), 12);
  put(state_.actuator_torque.data(), 12);
  for (bool c : state_.contacts) os << (c ? 1 : 0) << " ";
  os << state_.time << " " << (state_.terminated ? 1 : 0) << " ";
  put(command_velocity_.data(), 3);
  const SampledRandomization& r = state_.randomization;
  os << r.link_mass_scale.size() << " ";
  put(r.link_mass_scale.data(), r.link_mass_scale.size());
  os << r.payload_mass << " " << r.payload_position << " " << r.ground_friction << " "
     << r.motor_strength_scale << " " << r.joint_kp << " " << r.joint_kd << " ";
  put(r.initial_joint_scale.data(), 12);
  os << rng_.serialize();
  return os.str();
}

void QuadrupedEnv::deserialize_state(const std::string& blob) {
  std::istringstream is(blob);
  auto get = [&is](double* p, Eigen::Index n) {
    for (Eigen::Index i = 0; i < n; ++i) is >> p[i];
  };
  get(state_.base_position.data(), 3);
  double q[4];
  get(q, 4);
  state_.base_orientation = Quat(q[0], q[1], q[2], q[3]);
  get(state_.base_lin_velocity.data(), 3);
  get(state_.base_ang_velocity.data(), 3);
  get(state_.joint_positions.data(), 12);
  get(state_.joint_velocities.data(), 12);
  get(state_.actuator_torque.data(), 12);
  for (int leg = 0; leg < kNumLegs; ++leg) {
    int c = 0;
    is >> c;
    state_.contacts[leg] = c != 0;
  }
  int term = 0;
  is >> state_.time >> term;
  state_.terminated = term != 0;
  get(command_velocity_.data(), 3);
  SampledRandomization& r = state_.randomization;
  Eigen::Index n_links = 0;
  is >> n_links;
  r.link_mass_scale.resize(n_links);
  get(r.link_mass_scale.data(), n_links);
  is >> r.payload_mass >> r.payload_position >> r.ground_friction >> r.motor_strength_scale >>
      r.joint_kp >> r.joint_kd;
  get(r.initial_joint_scale.data(), 12);
  std::string rng_state((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  rng_.deserialize(rng_state);
  if (!is && !is.eof()) throw DataError("QuadrupedEnv::deserialize_state: malformed blob");

  // rebuild derived quantities from the recorded randomization
  pd_eff_ = cfg_.pd;
  pd_eff_.kp *= r.joint_kp / 20.0;
  pd_eff_.kd *= r.joint_kd / 0.5;
  pd_eff_.torque_limit = cfg_.model.torque_limits * r.motor_strength_scale;
  const double nominal_mass = cfg_.model.total_mass();
  mass_factor_ =
      (cfg_.model.link_masses.cwiseProduct(r.link_mass_scale).sum() + r.payload_mass) / nominal_mass;
  attitude_eq_pitch_ = -cfg_.payload_attitude_gain * r.payload_mass * r.payload_position;
}

std::vector<QuadrupedEnv::StepResult> batch_step(std::vector<QuadrupedEnv>& envs, const MatX& actions,
                                                 bool parallel) {
  if (actions.rows() != kNumJoints || actions.cols() != Eigen::Index(envs.size())) {
    throw ConfigError("batch_step: actions must be 12 x N");
  }
  std::vector<QuadrupedEnv::StepResult> results(envs.size());
  auto run = [&](std::size_t i) {
    try {
      results[i] = envs[i].step(actions.col(Eigen::Index(i)));
    } catch (const std::exception& e) {
      throw NumericError("batch_step: env " + std::to_string(i) + ": " + e.what());
    }
  };
  if (!parallel || envs.size() < 2) {
    for (std::size_t i = 0; i < envs.size(); ++i) run(i);
    return results;
  }
  const std::size_t n_threads = std::min<std::size_t>(envs.size(), 8);
  std::vector<std::future<void>> futures;
  for (std::size_t t = 0; t < n_threads; ++t) {
    futures.push_back(std::async(std::launch::async, [&, t]() {
      for (std::size_t i = t; i < envs.size(); i += n_threads) run(i);
    }));
  }
  for (auto& f : futures) f.get();
  return results;
}

}  // namespace camp
