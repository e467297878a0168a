#pragma once

#include "camp/adversarial.hpp"
#include "camp/motion.hpp"
#include "camp/trainer.hpp"
#include "camp/types.hpp"

#include <array>
#include <filesystem>
#include <string>
#include <vector>

namespace camp {

// Classic dynamic-programming alignment cost: Euclidean local cost, no band,
// boundary-aligned endpoints. Sequences are columns over time.
double dtw_distance(const MatX& a, const MatX& b);

struct LatentSequence {
  MatX latents;  // latent_dim x (frames - 1), one column per transition
  int label = 0;
};

// Skill-discriminator latents of every consecutive AMP pair of each clip.
std::vector<LatentSequence> latent_sequences(const std::vector<MotionClip>& clips,
                                             const Mlp& skill_disc,
                                             const FeatureNormalizer& normalizer);

// Standardizes each latent dimension to zero mean / unit variance over the
// pooled set (in place).
void standardize_latents(std::vector<LatentSequence>& sequences);

// Pairwise DTW over (standardized) sequences, downsampled by `stride` to
// bound cost. Symmetric with a zero diagonal.
MatX dtw_matrix(const std::vector<LatentSequence>& sequences, int stride = 2);

struct KmeansResult {
  std::vector<int> assignments;
  MatX centroids;  // d x k
  double purity = 0.0;
};

// Lloyd iterations from deterministic greedy-spread seeding; purity against
// the given ground-truth labels.
KmeansResult kmeans_purity(const MatX& features, const std::vector<int>& labels, int k,
                           int max_iterations = 200);

// Top-principal-component projection (dims x n) with a deterministic sign
// convention: the largest-magnitude loading of each component is positive.
MatX pca_project(const MatX& features, int dims = 2);

// Eigenvalues of the feature covariance, descending.
VecX pca_spectrum(const MatX& features);

struct ContactMetrics {
  std::array<double, kNumLegs> duty_factor{};
  std::array<double, kNumLegs> phase_offset{};  // cycle fraction relative to FL
};

// Duty factors and relative phase offsets from per-leg stance flags sampled
// at 1/dt; needs at least two gait cycles and a stance onset on every leg.
ContactMetrics contact_metrics(const std::vector<std::array<bool, kNumLegs>>& contacts,
                               double frequency_hz, double dt);

// Max circular distance between the relative offsets of two gaits (legs FR,
// RL, RR against FL), in cycle fractions.
double signature_distance(const std::array<double, kNumLegs>& a,
                          const std::array<double, kNumLegs>& b);

// Range-normalized mean absolute tracking error, percent. Joints whose target
// never moves are excluded; a fully constant target is an error.
double tracking_accuracy(const MatX& target, const MatX& actual);

struct AblationRow {
  std::string name;
  bool completed = false;
  bool multiple_gaits = false;
  bool switch_success = false;
  double max_pairwise_distance = 0.0;  // phase-signature spread across skills
};

struct AblationReport {
  std::vector<AblationRow> rows;
  std::string to_table() const;
  bool complete() const;
};

// Evaluates completed training runs (checkpoint_final + resolved_config.json
// in each directory) by commanded-skill rollouts and a mid-episode switch.
AblationReport ablation_report(const std::vector<std::pair<std::string, std::filesystem::path>>& runs,
                               const std::vector<Skill>& catalog, const EnvConfig& env_config,
                               std::uint64_t eval_seed);

// Shared evaluation helpers (also used by the acceptance suite).
ContactMetrics measure_rollout_contacts(const std::vector<TraceRow>& trace, double frequency_hz,
                                        double dt, double settle_seconds = 2.0);

}  // namespace camp
