#pragma once

#include "camp/gait.hpp"
#include "camp/kinematics.hpp"
#include "camp/motion.hpp"
#include "camp/rng.hpp"
#include "camp/types.hpp"

#include <array>
#include <functional>
#include <string>
#include <vector>

namespace camp {

struct RobotModel {
  QuadrupedGeometry geometry = QuadrupedGeometry::default_geometry();
  VecX link_masses;            // base + 12 leg links, kg
  double body_height = 0.30;   // nominal standing height, m
  JointVec nominal_joint_positions = JointVec::Zero();
  JointVec torque_limits = JointVec::Constant(33.5);  // Nm
  JointVec joint_inertia = JointVec::Constant(0.005); // reflected, kg m^2
  double joint_viscous_friction = 0.01;               // Nm s/rad

  static RobotModel default_model();
  double total_mass() const { return link_masses.sum(); }
  void validate() const;
};

struct PdParams {
  JointVec kp = JointVec::Constant(30.0);  // 40 on calf joints
  JointVec kd = JointVec::Constant(1.0);
  double action_scale = 0.25;  // rad per unit action
  JointVec torque_limit = JointVec::Constant(33.5);

  static PdParams default_params(const RobotModel& model);
};

// tau = kp (theta_target - theta) - kd theta_dot, clamped to torque_limit.
JointVec pd_torque(const JointVec& theta_target, const JointVec& theta, const JointVec& theta_dot,
                   const PdParams& pd);

// Per-episode physical parameter ranges. The joint Kp/Kd entries are sampled
// in the tabulated value ranges (reference values 20 and 0.5) and applied as
// multiplicative scales value/reference on the nominal gains.
struct DomainRandomizationConfig {
  bool enabled = true;
  std::array<double, 2> link_mass_scale{0.8, 1.2};
  std::array<double, 2> payload_mass{0.0, 3.0};          // kg
  std::array<double, 2> payload_position{-0.1, 0.1};     // m from base origin
  std::array<double, 2> ground_friction{0.05, 1.75};
  std::array<double, 2> motor_strength_scale{0.8, 1.2};
  std::array<double, 2> joint_kp{0.8 * 20.0, 1.2 * 20.0};
  std::array<double, 2> joint_kd{0.8 * 0.5, 1.2 * 0.5};
  std::array<double, 2> initial_joint_scale{0.5, 1.5};

  static DomainRandomizationConfig disabled();
};

struct SampledRandomization {
  VecX link_mass_scale;  // one per link
  double payload_mass = 0.0;
  double payload_position = 0.0;
  double ground_friction = 1.0;
  double motor_strength_scale = 1.0;
  double joint_kp = 20.0;  // Table-I parameterization, reference 20
  double joint_kd = 0.5;   // reference 0.5
  JointVec initial_joint_scale = JointVec::Ones();
};

struct Command {
  Vec3 velocity = Vec3::Zero();  // (vx, vy, wz) body frame
  VecX skill_onehot;             // length = active skill count
  int skill_index = 0;           // index into the active skill list

  static Command for_skill(int skill_index, int num_skills, const Vec3& velocity);
};

struct EnvState {
  Vec3 base_position = Vec3::Zero();
  Quat base_orientation = Quat::Identity();
  Vec3 base_lin_velocity = Vec3::Zero();   // world frame
  Vec3 base_ang_velocity = Vec3::Zero();   // body frame
  JointVec joint_positions = JointVec::Zero();
  JointVec joint_velocities = JointVec::Zero();
  JointVec actuator_torque = JointVec::Zero();  // first-order lag state
  std::array<bool, kNumLegs> contacts{false, false, false, false};
  double time = 0.0;
  bool terminated = false;
  SampledRandomization randomization;
};

inline constexpr int kObservationBaseDim = 45;  // plus one-hot length

struct EnvConfig {
  RobotModel model = RobotModel::default_model();
  PdParams pd = PdParams::default_params(model);
  DomainRandomizationConfig randomization;
  double control_dt = 0.02;
  int substeps = 4;
  double actuator_lag = 0.01;                 // s
  double height_termination_fraction = 0.6;   // of nominal height
  double tilt_termination = 1.0;              // rad
  double base_tracking_tau = 0.10;            // s, traction-following time constant
  double max_traction_speed = 3.0;            // m/s, stance-sweep speed cap
  double height_stiffness_omega = 30.0;       // rad/s, vertical support spring
  double attitude_stiffness_omega = 25.0;     // rad/s
  double payload_attitude_gain = 0.03;        // rad per (kg m) of payload offset

  void validate() const;
};

// Deterministic surrogate quadruped: PD-actuated joints with actuator lag and
// a centroidal base that tracks commands while supported and falls
// ballistically otherwise. Bit-exact given (seed, action sequence).
class QuadrupedEnv {
 public:
  QuadrupedEnv(EnvConfig cfg, std::uint64_t root_seed, int env_index);

  const EnvConfig& config() const { return cfg_; }
  const EnvState& state() const { return state_; }
  EnvState& mutable_state() { return state_; }
  Rng& rng() { return rng_; }
  int env_index() const { return env_index_; }

  void reset();
  void reseed(std::uint64_t root_seed, int env_index);

  // Velocity command the base dynamics track while supported.
  void set_command_velocity(const Vec3& v) { command_velocity_ = v; }
  const Vec3& command_velocity() const { return command_velocity_; }

  struct StepResult {
    AmpFeature feature;
    std::array<bool, kNumLegs> contacts;
    bool terminated = false;
  };

  // theta_target = theta_init + action_scale * action
  JointVec apply_action(const JointVec& action) const;

  StepResult step(const JointVec& action);
  StepResult step_with_targets(const JointVec& theta_target);  // open-loop replay

  VecX observation(const Command& command, const JointVec& prev_action) const;
  VecX privileged_observation(const Command& command) const;
  double task_reward(const Command& command) const;
  AmpFeature amp_feature() const;
  Eigen::Matrix<double, kNumLegs, 3> feet_body() const;

  // effective (randomized) gains in use since the last reset
  const PdParams& effective_pd() const { return pd_eff_; }

  std::string serialize_state() const;
  void deserialize_state(const std::string& blob);

 private:
  void apply_randomization();
  void substep(const JointVec& theta_target, double dts);
  void update_contacts();
  void check_termination();

  EnvConfig cfg_;
  EnvState state_;
  PdParams pd_eff_;
  Vec3 command_velocity_ = Vec3::Zero();
  double mass_factor_ = 1.0;      // effective / nominal total mass
  double attitude_eq_pitch_ = 0.0;
  Rng rng_;
  int env_index_ = 0;
};

// Static observation layout: [ang_vel(3), gravity(3), cmd(3), onehot(l),
// q(12), qd(12), prev_action(12)].
VecX build_observation(const EnvState& state, const Command& command, const JointVec& prev_action);

// Privileged critic extras: [base lin vel body(3), contacts(4), friction(1),
// payload mass(1)].
inline constexpr int kPrivilegedDim = 9;
VecX build_privileged(const EnvState& state, const Command& command);

double task_reward(const EnvState& state, const Command& command);

// N independent steps; result is identical across evaluation orders. Errors
// carry the offending environment index.
std::vector<QuadrupedEnv::StepResult> batch_step(std::vector<QuadrupedEnv>& envs,
                                                 const MatX& actions, bool parallel = false);

}  // namespace camp
