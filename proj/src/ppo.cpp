#include "camp/ppo.hpp"

#include "camp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace camp {

GaussianPolicy::GaussianPolicy(Mlp actor, double initial_std)
    : actor_(std::move(actor)), log_std_(VecX::Constant(actor_.output_dim(), std::log(initial_std))) {
  if (initial_std <= 0.0) throw ConfigError("GaussianPolicy: initial std must be > 0");
}

VecX GaussianPolicy::param_vector() const {
  VecX p(param_count());
  p.head(actor_.params().size()) = actor_.params();
  p.tail(log_std_.size()) = log_std_;
  return p;
}

void GaussianPolicy::set_param_vector(const VecX& p) {
  if (p.size() != Eigen::Index(param_count())) throw ConfigError("GaussianPolicy: bad param vector");
  actor_.params() = p.head(actor_.params().size());
  log_std_ = p.tail(log_std_.size());
}

VecX GaussianPolicy::sample(const VecX& mean, Rng& rng) const {
  VecX a(mean.size());
  for (Eigen::Index j = 0; j < mean.size(); ++j) {
    a(j) = mean(j) + std::exp(log_std_(j)) * rng.normal();
  }
  return a;
}

VecX GaussianPolicy::log_prob(const MatX& means, const MatX& actions) const {
  const Eigen::Index b = means.cols();
  const double base = -0.5 * double(act_dim()) * std::log(2.0 * M_PI) - log_std_.sum();
  VecX lp(b);
  const VecX inv_var = (-2.0 * log_std_).array().exp();
  for (Eigen::Index i = 0; i < b; ++i) {
    const VecX d = actions.col(i) - means.col(i);
    lp(i) = base - 0.5 * d.cwiseProduct(d).dot(inv_var);
  }
  return lp;
}

double GaussianPolicy::entropy() const {
  return log_std_.sum() + 0.5 * double(act_dim()) * (1.0 + std::log(2.0 * M_PI));
}

void PpoConfig::validate() const {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("PpoConfig: gamma must be in [0,1)");
  if (clip_ratio <= 0.0) throw ConfigError("PpoConfig: clip_ratio must be > 0");
  if (horizon < 1 || num_envs < 1 || epochs < 1 || minibatch_size < 1) {
    throw ConfigError("PpoConfig: horizon/envs/epochs/minibatch must be >= 1");
  }
  if (initial_action_std <= 0.0) throw ConfigError("PpoConfig: initial std must be > 0");
}

void RolloutBuffer::allocate(int T, int N, int obs_dim, int priv_dim, int act_dim) {
  horizon = T;
  num_envs = N;
  const Eigen::Index tn = Eigen::Index(T) * N;
  observations.setZero(obs_dim, tn);
  privileged.setZero(priv_dim, tn);
  actions.setZero(act_dim, tn);
  log_probs.setZero(tn);
  values.setZero(tn);
  dones.setZero(tn);
  reward_task.setZero(tn);
  reward_style.setZero(tn);
  reward_skill.setZero(tn);
  reward_total.setZero(tn);
  truncation_bootstrap.setZero(tn);
  amp_state.setZero(43, tn);
  amp_next.setZero(43, tn);
  skill_labels.assign(std::size_t(tn), 0);
  bootstrap_values.setZero(N);
  advantages.setZero(tn);
  returns.setZero(tn);
}

void gae_advantages(RolloutBuffer& buf, double gamma, double gae_lambda) {
  const int T = buf.horizon, N = buf.num_envs;
  buf.advantages.setZero(buf.size());
  buf.returns.setZero(buf.size());
  for (int e = 0; e < N; ++e) {
    double gae = 0.0;
    for (int t = T - 1; t >= 0; --t) {
      const Eigen::Index i = Eigen::Index(t) * N + e;
      const double not_done = 1.0 - buf.dones(i);
      const double v_next = (t == T - 1) ? buf.bootstrap_values(e) : buf.values(Eigen::Index(t + 1) * N + e);
      const double reward = buf.reward_total(i) + buf.truncation_bootstrap(i);
      const double delta = reward + gamma * v_next * not_done - buf.values(i);
      gae = delta + gamma * gae_lambda * not_done * gae;
      buf.advantages(i) = gae;
    }
  }
  buf.returns = buf.advantages + buf.values;
  const double mean = buf.advantages.mean();
  const double sd = std::sqrt((buf.advantages.array() - mean).square().mean());
  buf.advantages = (buf.advantages.array() - mean) / (sd + 1e-8);
}

PolicyLossResult policy_loss(const GaussianPolicy& policy, const MatX& obs, const MatX& actions,
                             const VecX& log_probs_old, const VecX& advantages, double clip_ratio,
                             double entropy_coef) {
  const Eigen::Index b = obs.cols();
  Mlp::Workspace ws;
  const MatX means = policy.actor().forward(obs, ws);
  const VecX lp = policy.log_prob(means, actions);

  PolicyLossResult res;
  const VecX log_ratio = lp - log_probs_old;
  const VecX ratio = log_ratio.array().exp();

  double surrogate_sum = 0.0;
  Eigen::Index clipped = 0;
  VecX dloss_dlp = VecX::Zero(b);
  for (Eigen::Index i = 0; i < b; ++i) {
    const double a = advantages(i), r = ratio(i);
    const double unclipped = r * a;
    const double clipped_term = std::clamp(r, 1.0 - clip_ratio, 1.0 + clip_ratio) * a;
    surrogate_sum += std::min(unclipped, clipped_term);
    const bool active = (a >= 0.0) ? (r <= 1.0 + clip_ratio) : (r >= 1.0 - clip_ratio);
    if (!active) ++clipped;
    if (active) dloss_dlp(i) = -r * a / double(b);
  }
  res.surrogate = -surrogate_sum / double(b);
  res.entropy = policy.entropy();
  res.approx_kl = -log_ratio.mean();
  res.clip_fraction = double(clipped) / double(b);
  res.loss = res.surrogate - entropy_coef * res.entropy;

  // chain rule through the Gaussian: dlp/dmean = (a - mean)/sigma^2,
  // dlp/dlog_std = ((a - mean)/sigma)^2 - 1
  const VecX inv_var = (-2.0 * policy.log_std()).array().exp();
  MatX dmean(policy.act_dim(), b);
  VecX dlogstd = VecX::Zero(policy.act_dim());
  for (Eigen::Index i = 0; i < b; ++i) {
    const VecX d = actions.col(i) - means.col(i);
    dmean.col(i) = dloss_dlp(i) * d.cwiseProduct(inv_var);
    dlogstd += dloss_dlp(i) * (d.cwiseProduct(d).cwiseProduct(inv_var) - VecX::Ones(d.size()));
  }
  dlogstd.array() -= entropy_coef;  // d(-entropy_coef * entropy)/dlog_std

  const VecX actor_grad = policy.actor().backward(ws, dmean);
  res.grad = VecX(policy.param_count());
  res.grad.head(actor_grad.size()) = actor_grad;
  res.grad.tail(dlogstd.size()) = dlogstd;
  if (!std::isfinite(res.loss)) throw NumericError("policy_loss: non-finite loss");
  return res;
}

ValueLossResult value_loss(const Mlp& critic, const MatX& critic_inputs, const VecX& returns) {
  const Eigen::Index b = critic_inputs.cols();
  Mlp::Workspace ws;
  const MatX v = critic.forward(critic_inputs, ws);
  const MatX diff = v - returns.transpose();
  ValueLossResult res;
  res.loss = diff.squaredNorm() / double(b);
  res.grad = critic.backward(ws, 2.0 / double(b) * diff);
  if (!std::isfinite(res.loss)) throw NumericError("value_loss: non-finite loss");
  return res;
}

PpoUpdateStats ppo_update(GaussianPolicy& policy, Mlp& critic, const RolloutBuffer& buf,
                          const PpoConfig& cfg, Adam& policy_adam, Adam& critic_adam, Rng& rng) {
  const Eigen::Index n = buf.size();
  MatX critic_inputs(buf.observations.rows() + buf.privileged.rows(), n);
  critic_inputs.topRows(buf.observations.rows()) = buf.observations;
  critic_inputs.bottomRows(buf.privileged.rows()) = buf.privileged;

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);

  PpoUpdateStats stats;
  int batches = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    // Fisher-Yates with the trainer's update stream
    for (Eigen::Index i = n - 1; i > 0; --i) {
      std::swap(order[std::size_t(i)], order[rng.index(std::uint64_t(i + 1))]);
    }
    for (Eigen::Index start = 0; start < n; start += cfg.minibatch_size) {
      const Eigen::Index count = std::min<Eigen::Index>(cfg.minibatch_size, n - start);
      MatX mb_obs(buf.observations.rows(), count), mb_act(buf.actions.rows(), count);
      MatX mb_critic(critic_inputs.rows(), count);
      VecX mb_lp(count), mb_adv(count), mb_ret(count);
      for (Eigen::Index k = 0; k < count; ++k) {
        const Eigen::Index src = order[std::size_t(start + k)];
        mb_obs.col(k) = buf.observations.col(src);
        mb_act.col(k) = buf.actions.col(src);
        mb_critic.col(k) = critic_inputs.col(src);
        mb_lp(k) = buf.log_probs(src);
        mb_adv(k) = buf.advantages(src);
        mb_ret(k) = buf.returns(src);
      }
      const PolicyLossResult pl =
          policy_loss(policy, mb_obs, mb_act, mb_lp, mb_adv, cfg.clip_ratio, cfg.entropy_coef);
      VecX params = policy.param_vector();
      policy_adam.step(params, pl.grad);
      policy.set_param_vector(params);

      const ValueLossResult vl = value_loss(critic, mb_critic, mb_ret);
      critic_adam.step(critic.params(), vl.grad);

      stats.policy_loss += pl.loss;
      stats.value_loss += vl.loss;
      stats.entropy = pl.entropy;
      stats.approx_kl += pl.approx_kl;
      stats.clip_fraction += pl.clip_fraction;
      ++batches;
    }
  }
  stats.policy_loss /= double(batches);
  stats.value_loss /= double(batches);
  stats.approx_kl /= double(batches);
  stats.clip_fraction /= double(batches);

  if (cfg.adaptive_lr) {
    double lr = policy_adam.config().learning_rate;
    if (stats.approx_kl > 2.0 * cfg.kl_target) {
      lr = std::max(1e-5, lr / 1.5);
    } else if (stats.approx_kl < 0.5 * cfg.kl_target && stats.approx_kl >= 0.0) {
      lr = std::min(1e-2, lr * 1.5);
    }
    policy_adam.config().learning_rate = lr;
    critic_adam.config().learning_rate = lr;
  }
  stats.learning_rate = policy_adam.config().learning_rate;
  return stats;
}

}  // namespace camp
