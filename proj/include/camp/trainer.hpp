#pragma once

#include "camp/adversarial.hpp"
#include "camp/env.hpp"
#include "camp/ppo.hpp"

#include <filesystem>
#include <functional>
#include <optional>

namespace camp {

struct AblationFlags {
  bool no_skill_obs = false;      // zero the skill one-hot in the observation
  bool no_conditioning = false;   // zero latent into the discriminator
  bool no_skill_disc = false;     // drop the skill discriminator entirely
  bool no_skill_reward = false;   // keep everything, set the skill weight to 0
};

struct TrainerConfig {
  PpoConfig ppo;
  RewardWeights rewards;
  EnvConfig env;
  int latent_dim = 8;
  double omega_gp = 10.0;   // conditional-discriminator gradient penalty
  double lambda_gp = 10.0;  // skill-discriminator gradient penalty
  double disc_learning_rate = 1e-3;
  int disc_batch = 256;
  double normalizer_warmup_fraction = 0.25;
  int iterations = 200;
  int checkpoint_every = 100;
  double episode_seconds = 10.0;
  std::vector<int> active_skills;  // catalog labels the policy trains on
  AblationFlags ablation;
  std::uint64_t seed = 0;
  std::vector<int> disc_hidden{1024, 512};
  std::vector<int> skill_disc_hidden{512, 256};
  std::vector<int> actor_hidden{512, 256, 128};
  std::vector<int> critic_hidden{512, 256, 128};

  void validate(std::size_t catalog_size) const;
};

struct IterationStats {
  int iteration = 0;
  double mean_task = 0.0, mean_style = 0.0, mean_skill = 0.0, mean_total = 0.0;
  double disc_loss = 0.0, disc_penalty = 0.0;
  double disc_expert_acc = 0.0, disc_policy_acc = 0.0;
  double skill_disc_loss = 0.0;
  PpoUpdateStats ppo;
  int terminations = 0;
};

// One entry of a skill-switch schedule: from `time` on, command the given
// catalog skill (velocity defaults to the skill's own command velocity).
struct ScheduleEntry {
  double time = 0.0;
  int label = 0;
  std::optional<Vec3> velocity;
};

struct SkillSchedule {
  std::vector<ScheduleEntry> entries;
  double duration = 10.0;

  void validate(std::size_t catalog_size) const;
  const ScheduleEntry& entry_at(double t) const;
};

struct TraceRow {
  double time = 0.0;
  int skill_label = 0;
  Vec3 command = Vec3::Zero();
  std::array<bool, kNumLegs> contacts{};
  JointVec joint_targets = JointVec::Zero();
  JointVec joint_positions = JointVec::Zero();
  Vec3 base_velocity_body = Vec3::Zero();
  double yaw_rate = 0.0;
  bool terminated = false;
};

void write_trace_csv(const std::filesystem::path& path, const std::vector<TraceRow>& rows);
std::vector<TraceRow> read_trace_csv(const std::filesystem::path& path);

// Alternating adversarial / PPO training over the surrogate environments.
class Trainer {
 public:
  Trainer(TrainerConfig cfg, std::vector<Skill> catalog, TransitionBuffer expert);

  IterationStats run_iteration();
  // Runs cfg.iterations iterations (resuming from the current count), writing
  // metrics.csv, the resolved config and periodic checkpoints under out_dir.
  void train(const std::filesystem::path& out_dir,
             const std::function<void(const IterationStats&)>& on_iteration = {});

  void save_checkpoint(const std::filesystem::path& dir) const;
  void load_checkpoint(const std::filesystem::path& dir);

  int iteration() const { return iteration_; }
  const TrainerConfig& config() const { return cfg_; }
  const std::vector<Skill>& catalog() const { return catalog_; }
  GaussianPolicy& policy() { return policy_; }
  const GaussianPolicy& policy() const { return policy_; }
  const Mlp& discriminator() const { return disc_; }
  const Mlp& skill_discriminator() const { return skill_disc_; }
  const SkillEmbedding& embedding() const { return embedding_; }
  const FeatureNormalizer& normalizer() const { return normalizer_; }
  const TransitionBuffer& expert_buffer() const { return expert_; }

  // One horizon of experience from the current policy; exposed for
  // evaluation and tests. Advances the environments.
  RolloutBuffer collect_rollouts();

 private:
  struct EpisodeState {
    int active_index = 0;  // into cfg_.active_skills
    Command command;
    JointVec prev_action = JointVec::Zero();
    AmpFeature prev_feature;
    int steps = 0;
  };

  void begin_episode(std::size_t e);
  Command observation_command(const EpisodeState& ep) const;
  int catalog_label(const EpisodeState& ep) const { return cfg_.active_skills[std::size_t(ep.active_index)]; }
  double disc_value(const NormalizedPair& pair) const;
  double style_reward_for(const NormalizedPair& pair) const;
  double skill_reward_for(const NormalizedPair& pair) const;
  std::vector<TransitionPair> sample_expert_batch(std::size_t batch);

  TrainerConfig cfg_;
  std::vector<Skill> catalog_;
  TransitionBuffer expert_;
  std::vector<std::uint32_t> expert_active_pool_;  // indices with active labels

  std::vector<QuadrupedEnv> envs_;
  std::vector<EpisodeState> episodes_;

  GaussianPolicy policy_;
  Mlp critic_;
  Mlp disc_;
  Mlp skill_disc_;
  SkillEmbedding embedding_;
  FeatureNormalizer normalizer_;

  Adam policy_adam_, critic_adam_, disc_adam_, skill_adam_, embed_adam_;
  Rng update_rng_;
  int iteration_ = 0;
  int episode_cap_steps_ = 500;
};

// Deterministic (mean-action) policy rollout under a skill schedule; resets
// the environment first. Used by evaluation, analysis and the CLI.
std::vector<TraceRow> rollout_policy(const GaussianPolicy& policy, QuadrupedEnv& env,
                                     const SkillSchedule& schedule,
                                     const std::vector<Skill>& catalog,
                                     const std::vector<int>& active_skills,
                                     const AblationFlags& ablation = {});

}  // namespace camp
