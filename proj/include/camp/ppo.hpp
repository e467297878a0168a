#pragma once

#include "camp/adam.hpp"
#include "camp/mlp.hpp"
#include "camp/rng.hpp"
#include "camp/types.hpp"

#include <vector>

namespace camp {

// Diagonal Gaussian over actions: mean from the actor network, learned
// state-independent log standard deviations. Trainable parameters are the
// flat concatenation [actor params; log_std].
class GaussianPolicy {
 public:
  GaussianPolicy(Mlp actor, double initial_std);

  const Mlp& actor() const { return actor_; }
  Mlp& actor() { return actor_; }
  const VecX& log_std() const { return log_std_; }
  VecX& log_std() { return log_std_; }
  int obs_dim() const { return actor_.input_dim(); }
  int act_dim() const { return actor_.output_dim(); }

  std::size_t param_count() const { return actor_.param_count() + std::size_t(log_std_.size()); }
  VecX param_vector() const;
  void set_param_vector(const VecX& p);

  MatX mean(const MatX& obs) const { return actor_.forward(obs); }
  VecX sample(const VecX& mean, Rng& rng) const;
  VecX log_prob(const MatX& means, const MatX& actions) const;  // per column
  double entropy() const;

 private:
  Mlp actor_;
  VecX log_std_;
};

struct RewardWeights {
  double task = 1.0;   // sub-term weights 1.5/0.75 live inside the task reward
  double style = 1.0;
  double skill = 0.3;
};

inline double compose_reward(double task, double style, double skill, const RewardWeights& w) {
  return w.task * task + w.style * style + w.skill * skill;
}

struct PpoConfig {
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double clip_ratio = 0.2;
  int epochs = 5;
  int minibatch_size = 512;
  double learning_rate = 1e-3;
  bool adaptive_lr = true;  // scale by measured divergence
  double kl_target = 0.01;
  int horizon = 24;   // T
  int num_envs = 64;  // N
  double entropy_coef = 0.005;
  double initial_action_std = 0.8;

  void validate() const;
};

// Per-step experience over a (T, N) rollout, flattened column-major with
// index t * N + e. AMP features are stored raw; normalization happens at
// discriminator-update time with the current statistics.
struct RolloutBuffer {
  int horizon = 0, num_envs = 0;
  MatX observations;    // obs_dim x TN
  MatX privileged;      // priv_dim x TN
  MatX actions;         // act_dim x TN
  VecX log_probs;       // TN
  VecX values;          // TN
  VecX dones;           // 1 when the episode ended at this step
  VecX reward_task, reward_style, reward_skill, reward_total;  // TN
  VecX truncation_bootstrap;  // discounted value folded in at time-limit cuts
  MatX amp_state, amp_next;  // 43 x TN
  std::vector<int> skill_labels;  // catalog label per step
  VecX bootstrap_values;  // N, V(s_T); mid-horizon truncations fold into rewards
  VecX advantages, returns;

  Eigen::Index size() const { return Eigen::Index(horizon) * num_envs; }
  void allocate(int T, int N, int obs_dim, int priv_dim, int act_dim);
};

// Generalized advantage estimation with episode-boundary masking; advantages
// are normalized over the whole buffer afterward.
void gae_advantages(RolloutBuffer& buffer, double gamma, double gae_lambda);

struct PolicyLossResult {
  double loss = 0.0;
  double surrogate = 0.0;
  double entropy = 0.0;
  double approx_kl = 0.0;
  double clip_fraction = 0.0;
  VecX grad;  // over [actor params; log_std]
};

// Clipped-surrogate objective with entropy bonus; exact analytic gradients.
PolicyLossResult policy_loss(const GaussianPolicy& policy, const MatX& obs, const MatX& actions,
                             const VecX& log_probs_old, const VecX& advantages, double clip_ratio,
                             double entropy_coef);

struct ValueLossResult {
  double loss = 0.0;
  VecX grad;
};

ValueLossResult value_loss(const Mlp& critic, const MatX& critic_inputs, const VecX& returns);

struct PpoUpdateStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double approx_kl = 0.0;
  double clip_fraction = 0.0;
  double learning_rate = 0.0;
};

// Multiple epochs over shuffled minibatches; the critic sees [obs; privileged].
PpoUpdateStats ppo_update(GaussianPolicy& policy, Mlp& critic, const RolloutBuffer& buffer,
                          const PpoConfig& cfg, Adam& policy_adam, Adam& critic_adam, Rng& rng);

}  // namespace camp
