#pragma once

#include "camp/env.hpp"
#include "camp/gait.hpp"
#include "camp/trainer.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace camp {

// Whole-experiment configuration: every field has a default, unknown keys are
// rejected. JSON on disk; see configs/ for examples.
struct ExperimentConfig {
  struct Dataset {
    std::vector<std::string> gaits{"trot", "pace", "bound", "pronk"};
    std::vector<double> frequencies_hz{2.0, 4.0};
    double duration_s = 4.0;
    double dt = 0.02;
    int transitions_per_clip = 500;
  } dataset;

  EnvConfig environment;

  struct TrainerSection {
    int iterations = 200;
    int num_envs = 64;
    int horizon = 24;
    double gamma = 0.99;
    double gae_lambda = 0.95;
    double clip_ratio = 0.2;
    int epochs = 5;
    int minibatch_size = 512;
    double learning_rate = 1e-3;
    bool adaptive_lr = true;
    double entropy_coef = 0.005;
    double initial_action_std = 0.8;
    RewardWeights reward_weights;
    int latent_dim = 8;
    double omega_gp = 10.0;
    double lambda_gp = 10.0;
    double disc_learning_rate = 1e-3;
    int disc_batch = 256;
    double normalizer_warmup_fraction = 0.25;
    double episode_seconds = 10.0;
    int checkpoint_every = 100;
    std::vector<std::string> active_skills{"trot_2Hz", "pronk_2Hz"};
    std::uint64_t seed = 0;
  } trainer;

  AblationFlags ablation;

  struct Analysis {
    int dtw_stride = 2;
  } analysis;

  // Catalog implied by the dataset section (gait-major x frequency).
  std::vector<Skill> catalog() const;
  int label_of(const std::string& skill_name) const;

  TrainerConfig trainer_config() const;

  static ExperimentConfig load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;
  std::string to_json() const;
  static ExperimentConfig from_json(const std::string& text);
};

}  // namespace camp
