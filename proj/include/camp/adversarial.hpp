#pragma once

#include "camp/mlp.hpp"
#include "camp/motion.hpp"
#include "camp/types.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace camp {

inline constexpr int kPairDim = 2 * kAmpFeatureDim;  // (s_t, s_{t+1})

// A standardized transition pair. Only FeatureNormalizer produces these, so a
// sample cannot be normalized twice or fed to a discriminator raw.
struct NormalizedPair {
  Eigen::Matrix<double, kPairDim, 1> x = Eigen::Matrix<double, kPairDim, 1>::Zero();
  int label = 0;
};

// Running per-dimension mean/variance over AMP features, shared by expert and
// policy samples. Frozen after the warmup fraction of training.
class FeatureNormalizer {
 public:
  explicit FeatureNormalizer(int dim = kAmpFeatureDim);

  void update(const MatX& feature_columns);
  void update(const std::vector<AmpFeature>& features);
  void freeze() { frozen_ = true; }
  bool frozen() const { return frozen_; }
  double count() const { return count_; }

  VecX mean() const { return mean_; }
  VecX stddev() const;

  VecX normalize_feature(const AmpFeature& f) const;
  NormalizedPair normalize(const TransitionPair& pair) const;
  std::vector<NormalizedPair> normalize(const std::vector<TransitionPair>& pairs) const;

  VecX serialize() const;
  static FeatureNormalizer deserialize(const VecX& packed);

 private:
  VecX mean_, m2_;
  double count_ = 0.0;
  bool frozen_ = false;
};

// Trainable map from discrete skill label to latent z. Rows start at unit
// norm so cosine rewards are well defined from the first step.
class SkillEmbedding {
 public:
  SkillEmbedding(int num_skills, int latent_dim, Rng& rng);
  SkillEmbedding(int num_skills, int latent_dim, VecX params);

  int num_skills() const { return num_skills_; }
  int latent_dim() const { return latent_dim_; }
  VecX embed(int label) const;
  Eigen::Map<const MatX> rows() const;  // latent_dim x num_skills
  VecX& params() { return params_; }
  const VecX& params() const { return params_; }

 private:
  int num_skills_, latent_dim_;
  VecX params_;  // column-major (latent_dim x num_skills)
};

// Input layouts (documented once, used everywhere):
//   conditional discriminator: [s_t; s_next; z]  (86 + d_z)
//   skill discriminator:       [s_t; s_next]     (86)
MatX conditional_disc_inputs(const std::vector<NormalizedPair>& pairs, const SkillEmbedding& table);
MatX skill_disc_inputs(const std::vector<NormalizedPair>& pairs);

Mlp make_conditional_discriminator(int latent_dim, Rng& rng,
                                   std::vector<int> hidden = {1024, 512});
Mlp make_skill_discriminator(int latent_dim, Rng& rng, std::vector<int> hidden = {512, 256});

// LSGAN objective value from discriminator outputs; the penalty argument is
// the batch-mean squared input-gradient norm on expert samples.
double lsgan_objective(const VecX& d_expert, const VecX& d_policy, double mean_penalty,
                       double omega_gp);

struct DiscLossResult {
  double loss = 0.0;
  double expert_term = 0.0;
  double policy_term = 0.0;
  double penalty_term = 0.0;     // omega_gp * mean ||grad_x D||^2
  double expert_accuracy = 0.0;  // fraction of expert samples with D > 0
  double policy_accuracy = 0.0;  // fraction of policy samples with D < 0
  VecX disc_grad;                // d loss / d discriminator params
  MatX embedding_grad;           // d loss / d E, latent_dim x num_skills
};

// Least-squares adversarial loss with input-gradient penalty on expert
// samples. Gradients are returned for the discriminator and the embedding
// table jointly; each sample is conditioned on E(sample.label).
DiscLossResult disc_loss(const std::vector<NormalizedPair>& expert_batch,
                         const std::vector<NormalizedPair>& policy_batch,
                         const SkillEmbedding& table, const Mlp& disc, double omega_gp);

double style_reward_from_value(double d);
double style_reward(const Mlp& disc, const NormalizedPair& pair, const SkillEmbedding& table);

// Cosine similarity in [-1,1]; zero-norm inputs yield 0 (counted, see
// zero_norm_cosine_count).
double skill_reward(const VecX& z_hat, const VecX& z);
long zero_norm_cosine_count();

struct SkillDiscLossResult {
  double loss = 0.0;
  double mse_term = 0.0;
  double penalty_term = 0.0;
  VecX grad;  // d loss / d skill-discriminator params (embedding held constant)
};

// Supervised skill-reconstruction loss on expert data (squared error to the
// label's embedding) plus input-gradient penalty weighted by lambda_gp.
SkillDiscLossResult skill_disc_loss(const std::vector<NormalizedPair>& expert_batch,
                                    const SkillEmbedding& table, const Mlp& skill_disc,
                                    double lambda_gp);

// Predicted latent and its nearest skill by cosine; ties break to the lowest
// label index.
std::pair<VecX, int> predict_skill(const Mlp& skill_disc, const SkillEmbedding& table,
                                   const NormalizedPair& pair);

int nearest_skill(const VecX& z_hat, const SkillEmbedding& table);

}  // namespace camp
