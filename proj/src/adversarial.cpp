#include "camp/adversarial.hpp"

#include "camp/errors.hpp"

#include <atomic>
#include <cmath>
#include <iostream>

namespace camp {

namespace {
constexpr double kVarianceFloor = 1e-8;
std::atomic<long> g_zero_norm_cosine{0};
}  // namespace

FeatureNormalizer::FeatureNormalizer(int dim)
    : mean_(VecX::Zero(dim)), m2_(VecX::Zero(dim)) {}

void FeatureNormalizer::update(const MatX& cols) {
  if (frozen_) return;
  if (cols.rows() != mean_.size()) throw ConfigError("FeatureNormalizer::update: dimension mismatch");
  // Chan et al. parallel merge of (count, mean, M2)
  const double nb = double(cols.cols());
  if (nb == 0.0) return;
  const VecX batch_mean = cols.rowwise().mean();
  VecX batch_m2 = VecX::Zero(mean_.size());
  for (Eigen::Index j = 0; j < cols.cols(); ++j) {
    const VecX d = cols.col(j) - batch_mean;
    batch_m2 += d.cwiseProduct(d);
  }
  if (count_ == 0.0) {
    mean_ = batch_mean;
    m2_ = batch_m2;
    count_ = nb;
    return;
  }
  const VecX delta = batch_mean - mean_;
  const double total = count_ + nb;
  mean_ += delta * (nb / total);
  m2_ += batch_m2 + delta.cwiseProduct(delta) * (count_ * nb / total);
  count_ = total;
}

void FeatureNormalizer::update(const std::vector<AmpFeature>& features) {
  MatX cols(kAmpFeatureDim, Eigen::Index(features.size()));
  for (std::size_t i = 0; i < features.size(); ++i) cols.col(Eigen::Index(i)) = features[i].flatten();
  update(cols);
}

VecX FeatureNormalizer::stddev() const {
  if (count_ < 2.0) return VecX::Ones(mean_.size());
  return (m2_ / count_).cwiseMax(kVarianceFloor).cwiseSqrt();
}

VecX FeatureNormalizer::normalize_feature(const AmpFeature& f) const {
  return (f.flatten() - mean_).cwiseQuotient(stddev());
}

NormalizedPair FeatureNormalizer::normalize(const TransitionPair& pair) const {
  NormalizedPair out;
  out.x.head<kAmpFeatureDim>() = normalize_feature(pair.s_t);
  out.x.tail<kAmpFeatureDim>() = normalize_feature(pair.s_next);
  out.label = pair.label;
  return out;
}

std::vector<NormalizedPair> FeatureNormalizer::normalize(const std::vector<TransitionPair>& pairs) const {
  std::vector<NormalizedPair> out;
  out.reserve(pairs.size());
  for (const TransitionPair& p : pairs) out.push_back(normalize(p));
  return out;
}

VecX FeatureNormalizer::serialize() const {
  const Eigen::Index d = mean_.size();
  VecX packed(2 * d + 2);
  packed(0) = count_;
  packed(1) = frozen_ ? 1.0 : 0.0;
  packed.segment(2, d) = mean_;
  packed.segment(2 + d, d) = m2_;
  return packed;
}

FeatureNormalizer FeatureNormalizer::deserialize(const VecX& packed) {
  const Eigen::Index d = (packed.size() - 2) / 2;
  FeatureNormalizer n{int(d)};
  n.count_ = packed(0);
  n.frozen_ = packed(1) != 0.0;
  n.mean_ = packed.segment(2, d);
  n.m2_ = packed.segment(2 + d, d);
  return n;
}

SkillEmbedding::SkillEmbedding(int num_skills, int latent_dim, Rng& rng)
    : num_skills_(num_skills), latent_dim_(latent_dim), params_(VecX::Zero(num_skills * latent_dim)) {
  if (num_skills < 1 || latent_dim < 1) throw ConfigError("SkillEmbedding: empty table");
  Eigen::Map<MatX> rows(params_.data(), latent_dim_, num_skills_);
  for (int s = 0; s < num_skills_; ++s) {
    VecX v(latent_dim_);
    do {
      for (int i = 0; i < latent_dim_; ++i) v(i) = rng.normal();
    } while (v.norm() < 1e-6);
    rows.col(s) = v / v.norm();
  }
}

SkillEmbedding::SkillEmbedding(int num_skills, int latent_dim, VecX params)
    : num_skills_(num_skills), latent_dim_(latent_dim), params_(std::move(params)) {
  if (params_.size() != Eigen::Index(num_skills) * latent_dim) {
    throw ConfigError("SkillEmbedding: parameter size mismatch");
  }
}

VecX SkillEmbedding::embed(int label) const {
  if (label < 0 || label >= num_skills_) throw DataError("SkillEmbedding: label out of range");
  return rows().col(label);
}

Eigen::Map<const MatX> SkillEmbedding::rows() const {
  return Eigen::Map<const MatX>(params_.data(), latent_dim_, num_skills_);
}

MatX conditional_disc_inputs(const std::vector<NormalizedPair>& pairs, const SkillEmbedding& table) {
  MatX x(kPairDim + table.latent_dim(), Eigen::Index(pairs.size()));
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    x.col(Eigen::Index(i)).head<kPairDim>() = pairs[i].x;
    x.col(Eigen::Index(i)).tail(table.latent_dim()) = table.embed(pairs[i].label);
  }
  return x;
}

MatX skill_disc_inputs(const std::vector<NormalizedPair>& pairs) {
  MatX x(kPairDim, Eigen::Index(pairs.size()));
  for (std::size_t i = 0; i < pairs.size(); ++i) x.col(Eigen::Index(i)) = pairs[i].x;
  return x;
}

Mlp make_conditional_discriminator(int latent_dim, Rng& rng, std::vector<int> hidden) {
  MlpSpec spec;
  spec.sizes.push_back(kPairDim + latent_dim);
  spec.sizes.insert(spec.sizes.end(), hidden.begin(), hidden.end());
  spec.sizes.push_back(1);
  return Mlp::orthogonal_init(std::move(spec), rng, 1.0);
}

Mlp make_skill_discriminator(int latent_dim, Rng& rng, std::vector<int> hidden) {
  MlpSpec spec;
  spec.sizes.push_back(kPairDim);
  spec.sizes.insert(spec.sizes.end(), hidden.begin(), hidden.end());
  spec.sizes.push_back(latent_dim);
  return Mlp::orthogonal_init(std::move(spec), rng, 1.0);
}

double lsgan_objective(const VecX& d_expert, const VecX& d_policy, double mean_penalty,
                       double omega_gp) {
  const double expert_term = (d_expert.array() - 1.0).square().mean();
  const double policy_term = (d_policy.array() + 1.0).square().mean();
  return expert_term + policy_term + omega_gp * mean_penalty;
}

DiscLossResult disc_loss(const std::vector<NormalizedPair>& expert_batch,
                         const std::vector<NormalizedPair>& policy_batch,
                         const SkillEmbedding& table, const Mlp& disc, double omega_gp) {
  if (expert_batch.empty() || policy_batch.empty()) throw DataError("disc_loss: empty batch");
  const double ne = double(expert_batch.size()), np = double(policy_batch.size());
  const int dz = table.latent_dim();

  DiscLossResult res;
  res.disc_grad = VecX::Zero(Eigen::Index(disc.param_count()));
  res.embedding_grad = MatX::Zero(dz, table.num_skills());

  const MatX xe = conditional_disc_inputs(expert_batch, table);
  const MatX xp = conditional_disc_inputs(policy_batch, table);

  Mlp::Workspace ws_e, ws_p;
  const MatX de = disc.forward(xe, ws_e);
  const MatX dp = disc.forward(xp, ws_p);

  res.expert_term = (de.array() - 1.0).square().mean();
  res.policy_term = (dp.array() + 1.0).square().mean();
  res.expert_accuracy = double((de.array() > 0.0).count()) / ne;
  res.policy_accuracy = double((dp.array() < 0.0).count()) / np;

  MatX xe_grad, xp_grad;
  const MatX up_e = 2.0 / ne * (de.array() - 1.0).matrix();
  const MatX up_p = 2.0 / np * (dp.array() + 1.0).matrix();
  res.disc_grad += disc.backward(ws_e, up_e, &xe_grad);
  res.disc_grad += disc.backward(ws_p, up_p, &xp_grad);

  double penalty_sum = 0.0;
  if (omega_gp != 0.0) {
    VecX gp_grad = VecX::Zero(Eigen::Index(disc.param_count()));
    MatX gp_input_grad;
    penalty_sum = disc.input_gradient_penalty(ws_e, gp_grad, &gp_input_grad);
    res.disc_grad += (omega_gp / ne) * gp_grad;
    xe_grad += (omega_gp / ne) * gp_input_grad;
  }
  res.penalty_term = omega_gp * penalty_sum / ne;
  res.loss = res.expert_term + res.policy_term + res.penalty_term;
  if (!std::isfinite(res.loss)) throw NumericError("disc_loss: non-finite loss");

  // conditioning input slice accumulates into the embedding rows
  for (std::size_t i = 0; i < expert_batch.size(); ++i) {
    res.embedding_grad.col(expert_batch[i].label) += xe_grad.col(Eigen::Index(i)).tail(dz);
  }
  for (std::size_t i = 0; i < policy_batch.size(); ++i) {
    res.embedding_grad.col(policy_batch[i].label) += xp_grad.col(Eigen::Index(i)).tail(dz);
  }
  return res;
}

double style_reward_from_value(double d) {
  return std::max(0.0, 1.0 - 0.25 * (d - 1.0) * (d - 1.0));
}

double style_reward(const Mlp& disc, const NormalizedPair& pair, const SkillEmbedding& table) {
  VecX x(kPairDim + table.latent_dim());
  x.head<kPairDim>() = pair.x;
  x.tail(table.latent_dim()) = table.embed(pair.label);
  return style_reward_from_value(disc.forward(x)(0));
}

double skill_reward(const VecX& z_hat, const VecX& z) {
  const double nh = z_hat.norm(), nz = z.norm();
  if (nh < 1e-12 || nz < 1e-12) {
    if (g_zero_norm_cosine.fetch_add(1) == 0) {
      std::cerr << "[camp] warning: zero-norm latent in cosine similarity, returning 0\n";
    }
    return 0.0;
  }
  return z_hat.dot(z) / (nh * nz);
}

long zero_norm_cosine_count() { return g_zero_norm_cosine.load(); }

SkillDiscLossResult skill_disc_loss(const std::vector<NormalizedPair>& expert_batch,
                                    const SkillEmbedding& table, const Mlp& skill_disc,
                                    double lambda_gp) {
  if (expert_batch.empty()) throw DataError("skill_disc_loss: empty batch");
  const double n = double(expert_batch.size());
  const MatX x = skill_disc_inputs(expert_batch);
  MatX targets(table.latent_dim(), x.cols());
  for (std::size_t i = 0; i < expert_batch.size(); ++i) {
    targets.col(Eigen::Index(i)) = table.embed(expert_batch[i].label);
  }

  Mlp::Workspace ws;
  const MatX z_hat = skill_disc.forward(x, ws);
  const MatX diff = z_hat - targets;

  SkillDiscLossResult res;
  res.mse_term = diff.squaredNorm() / n;
  res.grad = skill_disc.backward(ws, (2.0 / n) * diff);

  if (lambda_gp != 0.0) {
    VecX gp_grad = VecX::Zero(Eigen::Index(skill_disc.param_count()));
    const double penalty_sum = skill_disc.input_gradient_penalty(ws, gp_grad);
    res.penalty_term = lambda_gp * penalty_sum / n;
    res.grad += (lambda_gp / n) * gp_grad;
  }
  res.loss = res.mse_term + res.penalty_term;
  if (!std::isfinite(res.loss)) throw NumericError("skill_disc_loss: non-finite loss");
  return res;
}

int nearest_skill(const VecX& z_hat, const SkillEmbedding& table) {
  int best = 0;
  double best_cos = -2.0;
  for (int s = 0; s < table.num_skills(); ++s) {
    const double c = skill_reward(z_hat, table.embed(s));
    if (c > best_cos) {
      best_cos = c;
      best = s;
    }
  }
  return best;
}

std::pair<VecX, int> predict_skill(const Mlp& skill_disc, const SkillEmbedding& table,
                                   const NormalizedPair& pair) {
  const VecX z_hat = skill_disc.forward(VecX(pair.x));
  return {z_hat, nearest_skill(z_hat, table)};
}

}  // namespace camp
