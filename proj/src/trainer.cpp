#include "camp/trainer.hpp"

#include "camp/checkpoint.hpp"
#include "camp/csv.hpp"
#include "camp/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>

namespace camp {

namespace fs = std::filesystem;

void TrainerConfig::validate(std::size_t catalog_size) const {
  ppo.validate();
  env.validate();
  if (latent_dim < 1) throw ConfigError("TrainerConfig: latent_dim must be >= 1");
  if (active_skills.empty()) throw ConfigError("TrainerConfig: no active skills");
  for (int label : active_skills) {
    if (label < 0 || label >= int(catalog_size)) {
      throw ConfigError("TrainerConfig: active skill label out of catalog range");
    }
  }
  if (iterations < 0) throw ConfigError("TrainerConfig: iterations must be >= 0");
  if (disc_batch < 1) throw ConfigError("TrainerConfig: disc_batch must be >= 1");
  if (rewards.task < 0 || rewards.style < 0 || rewards.skill < 0) {
    throw ConfigError("TrainerConfig: reward weights must be >= 0");
  }
}

void SkillSchedule::validate(std::size_t catalog_size) const {
  if (entries.empty()) throw ConfigError("SkillSchedule: empty schedule");
  if (entries.front().time != 0.0) throw ConfigError("SkillSchedule: first entry must start at t=0");
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].label < 0 || entries[i].label >= int(catalog_size)) {
      throw ConfigError("SkillSchedule: label out of range");
    }
    if (i > 0 && entries[i].time <= entries[i - 1].time) {
      throw ConfigError("SkillSchedule: times must be strictly increasing");
    }
  }
}

const ScheduleEntry& SkillSchedule::entry_at(double t) const {
  const ScheduleEntry* current = &entries.front();
  for (const ScheduleEntry& e : entries) {
    if (e.time <= t) current = &e;
  }
  return *current;
}

Trainer::Trainer(TrainerConfig cfg, std::vector<Skill> catalog, TransitionBuffer expert)
    : cfg_(std::move(cfg)),
      catalog_(std::move(catalog)),
      expert_(std::move(expert)),
      policy_([&] {
        Rng init_rng = Rng::derive(cfg_.seed, 1000);
        MlpSpec actor_spec;
        actor_spec.sizes.push_back(kObservationBaseDim + int(cfg_.active_skills.size()));
        actor_spec.sizes.insert(actor_spec.sizes.end(), cfg_.actor_hidden.begin(), cfg_.actor_hidden.end());
        actor_spec.sizes.push_back(kNumJoints);
        return GaussianPolicy(Mlp::orthogonal_init(std::move(actor_spec), init_rng, 0.01),
                              cfg_.ppo.initial_action_std);
      }()),
      critic_([&] {
        Rng init_rng = Rng::derive(cfg_.seed, 1001);
        MlpSpec spec;
        spec.sizes.push_back(kObservationBaseDim + int(cfg_.active_skills.size()) + kPrivilegedDim);
        spec.sizes.insert(spec.sizes.end(), cfg_.critic_hidden.begin(), cfg_.critic_hidden.end());
        spec.sizes.push_back(1);
        return Mlp::orthogonal_init(std::move(spec), init_rng, 1.0);
      }()),
      disc_([&] {
        Rng init_rng = Rng::derive(cfg_.seed, 1002);
        return make_conditional_discriminator(cfg_.latent_dim, init_rng, cfg_.disc_hidden);
      }()),
      skill_disc_([&] {
        Rng init_rng = Rng::derive(cfg_.seed, 1003);
        return make_skill_discriminator(cfg_.latent_dim, init_rng, cfg_.skill_disc_hidden);
      }()),
      embedding_([&] {
        Rng init_rng = Rng::derive(cfg_.seed, 1004);
        return SkillEmbedding(int(catalog_.size()), cfg_.latent_dim, init_rng);
      }()),
      normalizer_(kAmpFeatureDim),
      update_rng_(Rng::derive(cfg_.seed, 2000)) {
  cfg_.validate(catalog_.size());

  policy_adam_ = Adam(Eigen::Index(policy_.param_count()), {cfg_.ppo.learning_rate});
  critic_adam_ = Adam(critic_.params().size(), {cfg_.ppo.learning_rate});
  disc_adam_ = Adam(disc_.params().size(), {cfg_.disc_learning_rate});
  skill_adam_ = Adam(skill_disc_.params().size(), {cfg_.disc_learning_rate});
  embed_adam_ = Adam(embedding_.params().size(), {cfg_.disc_learning_rate});

  for (std::uint32_t i = 0; i < expert_.size(); ++i) {
    if (std::find(cfg_.active_skills.begin(), cfg_.active_skills.end(), expert_.pair(i).label) !=
        cfg_.active_skills.end()) {
      expert_active_pool_.push_back(i);
    }
  }
  if (expert_active_pool_.empty()) throw DataError("Trainer: expert buffer has no active-skill pairs");

  // warm-start feature statistics on the expert data
  {
    MatX cols(kAmpFeatureDim, Eigen::Index(expert_active_pool_.size()));
    for (std::size_t i = 0; i < expert_active_pool_.size(); ++i) {
      cols.col(Eigen::Index(i)) = expert_.pair(expert_active_pool_[i]).s_t.flatten();
    }
    normalizer_.update(cols);
  }

  episode_cap_steps_ = std::max(1, int(std::lround(cfg_.episode_seconds / cfg_.env.control_dt)));

  envs_.reserve(std::size_t(cfg_.ppo.num_envs));
  episodes_.resize(std::size_t(cfg_.ppo.num_envs));
  for (int e = 0; e < cfg_.ppo.num_envs; ++e) {
    envs_.emplace_back(cfg_.env, cfg_.seed, e);
  }
  for (std::size_t e = 0; e < envs_.size(); ++e) begin_episode(e);
}

void Trainer::begin_episode(std::size_t e) {
  QuadrupedEnv& env = envs_[e];
  env.reset();
  EpisodeState& ep = episodes_[e];
  ep.active_index = int(env.rng().index(cfg_.active_skills.size()));
  const Skill& skill = catalog_[std::size_t(cfg_.active_skills[std::size_t(ep.active_index)])];
  ep.command = Command::for_skill(ep.active_index, int(cfg_.active_skills.size()),
                                  skill.spec.command_velocity);
  env.set_command_velocity(skill.spec.command_velocity);
  ep.prev_action.setZero();
  ep.prev_feature = env.amp_feature();
  ep.steps = 0;
}

Command Trainer::observation_command(const EpisodeState& ep) const {
  if (!cfg_.ablation.no_skill_obs) return ep.command;
  Command masked = ep.command;
  masked.skill_onehot.setZero();
  return masked;
}

double Trainer::disc_value(const NormalizedPair& pair) const {
  VecX x(kPairDim + cfg_.latent_dim);
  x.head<kPairDim>() = pair.x;
  if (cfg_.ablation.no_conditioning) {
    x.tail(cfg_.latent_dim).setZero();
  } else {
    x.tail(cfg_.latent_dim) = embedding_.embed(pair.label);
  }
  return disc_.forward(x)(0);
}

double Trainer::style_reward_for(const NormalizedPair& pair) const {
  return style_reward_from_value(disc_value(pair));
}

double Trainer::skill_reward_for(const NormalizedPair& pair) const {
  if (cfg_.ablation.no_skill_disc) return 0.0;
  const VecX z_hat = skill_disc_.forward(VecX(pair.x));
  return skill_reward(z_hat, embedding_.embed(pair.label));
}

std::vector<TransitionPair> Trainer::sample_expert_batch(std::size_t batch) {
  std::vector<TransitionPair> out;
  out.reserve(batch);
  for (std::size_t i = 0; i < batch; ++i) {
    out.push_back(expert_.pair(expert_active_pool_[update_rng_.index(expert_active_pool_.size())]));
  }
  return out;
}

RolloutBuffer Trainer::collect_rollouts() {
  const int T = cfg_.ppo.horizon, N = cfg_.ppo.num_envs;
  const int obs_dim = policy_.obs_dim();
  RolloutBuffer buf;
  buf.allocate(T, N, obs_dim, kPrivilegedDim, kNumJoints);

  const double skill_weight_active = cfg_.ablation.no_skill_reward ? 0.0 : cfg_.rewards.skill;
  RewardWeights weights = cfg_.rewards;
  weights.skill = skill_weight_active;

  for (int t = 0; t < T; ++t) {
    MatX obs(obs_dim, N), critic_in(obs_dim + kPrivilegedDim, N);
    for (int e = 0; e < N; ++e) {
      const Command oc = observation_command(episodes_[std::size_t(e)]);
      obs.col(e) = envs_[std::size_t(e)].observation(oc, episodes_[std::size_t(e)].prev_action);
      critic_in.col(e).head(obs_dim) = obs.col(e);
      critic_in.col(e).tail(kPrivilegedDim) = envs_[std::size_t(e)].privileged_observation(oc);
    }
    const MatX means = policy_.mean(obs);
    MatX actions(kNumJoints, N);
    for (int e = 0; e < N; ++e) {
      actions.col(e) = policy_.sample(means.col(e), envs_[std::size_t(e)].rng());
    }
    const VecX lp = policy_.log_prob(means, actions);
    const MatX values = critic_.forward(critic_in);

    // step all environments, then batch the discriminator reward evaluations
    std::vector<QuadrupedEnv::StepResult> results(static_cast<std::size_t>(N));
    for (int e = 0; e < N; ++e) {
      results[std::size_t(e)] = envs_[std::size_t(e)].step(actions.col(e));
    }

    std::vector<NormalizedPair> pairs(static_cast<std::size_t>(N));
    for (int e = 0; e < N; ++e) {
      TransitionPair raw{episodes_[std::size_t(e)].prev_feature, results[std::size_t(e)].feature,
                         catalog_label(episodes_[std::size_t(e)])};
      pairs[std::size_t(e)] = normalizer_.normalize(raw);
    }
    VecX style_values(N), skill_values(N);
    {
      MatX disc_in(kPairDim + cfg_.latent_dim, N);
      for (int e = 0; e < N; ++e) {
        disc_in.col(e).head<kPairDim>() = pairs[std::size_t(e)].x;
        if (cfg_.ablation.no_conditioning) {
          disc_in.col(e).tail(cfg_.latent_dim).setZero();
        } else {
          disc_in.col(e).tail(cfg_.latent_dim) = embedding_.embed(pairs[std::size_t(e)].label);
        }
      }
      const MatX d = disc_.forward(disc_in);
      for (int e = 0; e < N; ++e) style_values(e) = style_reward_from_value(d(0, e));
      if (cfg_.ablation.no_skill_disc) {
        skill_values.setZero();
      } else {
        const MatX z_hat = skill_disc_.forward(MatX(disc_in.topRows(kPairDim)));
        for (int e = 0; e < N; ++e) {
          skill_values(e) = skill_reward(z_hat.col(e), embedding_.embed(pairs[std::size_t(e)].label));
        }
      }
    }

    for (int e = 0; e < N; ++e) {
      EpisodeState& ep = episodes_[std::size_t(e)];
      const Eigen::Index i = Eigen::Index(t) * N + e;
      const double r_task = envs_[std::size_t(e)].task_reward(ep.command);
      double r_total = compose_reward(r_task, style_values(e), skill_values(e), weights);

      buf.observations.col(i) = obs.col(e);
      buf.privileged.col(i) = critic_in.col(e).tail(kPrivilegedDim);
      buf.actions.col(i) = actions.col(e);
      buf.log_probs(i) = lp(e);
      buf.values(i) = values(0, e);
      buf.reward_task(i) = r_task;
      buf.reward_style(i) = style_values(e);
      buf.reward_skill(i) = skill_values(e);
      buf.amp_state.col(i) = ep.prev_feature.flatten();
      buf.amp_next.col(i) = results[std::size_t(e)].feature.flatten();
      buf.skill_labels[std::size_t(i)] = catalog_label(ep);

      ep.prev_feature = results[std::size_t(e)].feature;
      ep.prev_action = actions.col(e);
      ep.steps += 1;

      const bool terminated = results[std::size_t(e)].terminated;
      const bool truncated = !terminated && ep.steps >= episode_cap_steps_;
      if (truncated) {
        // time-limit bootstrap keeps the value target unbiased
        const Command oc = observation_command(ep);
        VecX cin(obs_dim + kPrivilegedDim);
        cin.head(obs_dim) = envs_[std::size_t(e)].observation(oc, ep.prev_action);
        cin.tail(kPrivilegedDim) = envs_[std::size_t(e)].privileged_observation(oc);
        buf.truncation_bootstrap(i) = cfg_.ppo.gamma * critic_.forward(cin)(0);
      }
      buf.reward_total(i) = r_total;
      buf.dones(i) = (terminated || truncated) ? 1.0 : 0.0;
      if (terminated || truncated) begin_episode(std::size_t(e));
    }
  }

  // bootstrap values at the rollout boundary
  {
    MatX critic_in(policy_.obs_dim() + kPrivilegedDim, N);
    for (int e = 0; e < N; ++e) {
      const Command oc = observation_command(episodes_[std::size_t(e)]);
      critic_in.col(e).head(policy_.obs_dim()) =
          envs_[std::size_t(e)].observation(oc, episodes_[std::size_t(e)].prev_action);
      critic_in.col(e).tail(kPrivilegedDim) = envs_[std::size_t(e)].privileged_observation(oc);
    }
    buf.bootstrap_values = critic_.forward(critic_in).row(0);
  }
  return buf;
}

IterationStats Trainer::run_iteration() {
  IterationStats stats;
  stats.iteration = iteration_;

  RolloutBuffer buf = collect_rollouts();
  stats.mean_task = buf.reward_task.mean();
  stats.mean_style = buf.reward_style.mean();
  stats.mean_skill = buf.reward_skill.mean();
  stats.mean_total = buf.reward_total.mean();
  stats.terminations = int(buf.dones.sum());

  // feature statistics update during warmup, frozen afterwards
  const int warmup_iters = int(std::ceil(cfg_.normalizer_warmup_fraction * cfg_.iterations));
  if (iteration_ < warmup_iters) {
    normalizer_.update(buf.amp_next);
  } else if (!normalizer_.frozen()) {
    normalizer_.freeze();
  }

  // discriminator update: equal-size expert/policy batches
  {
    const std::size_t b = std::size_t(cfg_.disc_batch);
    std::vector<NormalizedPair> expert_batch, policy_batch;
    expert_batch.reserve(b);
    policy_batch.reserve(b);
    for (const TransitionPair& p : sample_expert_batch(b)) expert_batch.push_back(normalizer_.normalize(p));
    for (std::size_t i = 0; i < b; ++i) {
      const Eigen::Index k = Eigen::Index(update_rng_.index(std::uint64_t(buf.size())));
      TransitionPair raw{AmpFeature::unflatten(buf.amp_state.col(k)),
                         AmpFeature::unflatten(buf.amp_next.col(k)), buf.skill_labels[std::size_t(k)]};
      policy_batch.push_back(normalizer_.normalize(raw));
    }
    if (cfg_.ablation.no_conditioning) {
      // plain AMP: condition every sample on a zero latent
      SkillEmbedding zero_table(1, cfg_.latent_dim, VecX::Zero(cfg_.latent_dim));
      for (auto& p : expert_batch) p.label = 0;
      for (auto& p : policy_batch) p.label = 0;
      DiscLossResult dl = disc_loss(expert_batch, policy_batch, zero_table, disc_, cfg_.omega_gp);
      disc_adam_.step(disc_.params(), dl.disc_grad);
      stats.disc_loss = dl.loss;
      stats.disc_penalty = dl.penalty_term;
      stats.disc_expert_acc = dl.expert_accuracy;
      stats.disc_policy_acc = dl.policy_accuracy;
    } else {
      DiscLossResult dl = disc_loss(expert_batch, policy_batch, embedding_, disc_, cfg_.omega_gp);
      disc_adam_.step(disc_.params(), dl.disc_grad);
      VecX eg = Eigen::Map<const VecX>(dl.embedding_grad.data(), dl.embedding_grad.size());
      embed_adam_.step(embedding_.params(), eg);
      stats.disc_loss = dl.loss;
      stats.disc_penalty = dl.penalty_term;
      stats.disc_expert_acc = dl.expert_accuracy;
      stats.disc_policy_acc = dl.policy_accuracy;
    }
  }

  // skill discriminator: supervised on expert data only
  if (!cfg_.ablation.no_skill_disc) {
    std::vector<NormalizedPair> batch;
    for (const TransitionPair& p : sample_expert_batch(std::size_t(cfg_.disc_batch))) {
      batch.push_back(normalizer_.normalize(p));
    }
    SkillDiscLossResult sl = skill_disc_loss(batch, embedding_, skill_disc_, cfg_.lambda_gp);
    skill_adam_.step(skill_disc_.params(), sl.grad);
    stats.skill_disc_loss = sl.loss;
  }

  gae_advantages(buf, cfg_.ppo.gamma, cfg_.ppo.gae_lambda);
  stats.ppo = ppo_update(policy_, critic_, buf, cfg_.ppo, policy_adam_, critic_adam_, update_rng_);

  ++iteration_;
  return stats;
}

void Trainer::train(const fs::path& out_dir, const std::function<void(const IterationStats&)>& cb) {
  fs::create_directories(out_dir);
  {
    std::ofstream cfg_out(out_dir / "resolved_config.json");
    nlohmann::json j;
    j["seed"] = cfg_.seed;
    j["iterations"] = cfg_.iterations;
    j["active_skills"] = cfg_.active_skills;
    j["ablation"] = {{"no_skill_obs", cfg_.ablation.no_skill_obs},
                     {"no_conditioning", cfg_.ablation.no_conditioning},
                     {"no_skill_disc", cfg_.ablation.no_skill_disc},
                     {"no_skill_reward", cfg_.ablation.no_skill_reward}};
    j["reward_weights"] = {{"task", cfg_.rewards.task},
                           {"style", cfg_.rewards.style},
                           {"skill", cfg_.ablation.no_skill_reward ? 0.0 : cfg_.rewards.skill}};
    j["latent_dim"] = cfg_.latent_dim;
    j["omega_gp"] = cfg_.omega_gp;
    j["lambda_gp"] = cfg_.lambda_gp;
    j["num_envs"] = cfg_.ppo.num_envs;
    j["horizon"] = cfg_.ppo.horizon;
    cfg_out << j.dump(2) << "\n";
  }

  const bool append = iteration_ > 0;
  CsvWriter metrics(out_dir / "metrics.csv",
                    {"iteration", "task", "style", "skill", "total", "disc_loss", "disc_penalty",
                     "disc_expert_acc", "disc_policy_acc", "skill_disc_loss", "policy_loss",
                     "value_loss", "entropy", "approx_kl", "clip_fraction", "learning_rate",
                     "terminations"},
                    append);

  if (cfg_.iterations == 0 || iteration_ == 0) save_checkpoint(out_dir / "checkpoint_init");

  while (iteration_ < cfg_.iterations) {
    const IterationStats s = run_iteration();
    metrics.row({double(s.iteration), s.mean_task, s.mean_style, s.mean_skill, s.mean_total,
                 s.disc_loss, s.disc_penalty, s.disc_expert_acc, s.disc_policy_acc,
                 s.skill_disc_loss, s.ppo.policy_loss, s.ppo.value_loss, s.ppo.entropy,
                 s.ppo.approx_kl, s.ppo.clip_fraction, s.ppo.learning_rate,
                 double(s.terminations)});
    metrics.flush();
    if (cb) cb(s);
    if (cfg_.checkpoint_every > 0 && iteration_ % cfg_.checkpoint_every == 0 &&
        iteration_ < cfg_.iterations) {
      char name[32];
      std::snprintf(name, sizeof(name), "checkpoint_%06d", iteration_);
      save_checkpoint(out_dir / name);
    }
  }
  save_checkpoint(out_dir / "checkpoint_final");
}

void Trainer::save_checkpoint(const fs::path& dir) const {
  fs::create_directories(dir);
  save_network(dir / "actor.net", policy_.actor());
  save_vector(dir / "log_std.vec", policy_.log_std());
  save_network(dir / "critic.net", critic_);
  save_network(dir / "disc.net", disc_);
  save_network(dir / "skill_disc.net", skill_disc_);
  save_vector(dir / "embedding.vec", embedding_.params());
  save_vector(dir / "normalizer.vec", normalizer_.serialize());
  save_adam(dir / "adam_policy.vec", policy_adam_);
  save_adam(dir / "adam_critic.vec", critic_adam_);
  save_adam(dir / "adam_disc.vec", disc_adam_);
  save_adam(dir / "adam_skill.vec", skill_adam_);
  save_adam(dir / "adam_embed.vec", embed_adam_);

  nlohmann::json j;
  j["iteration"] = iteration_;
  j["policy_lr"] = policy_adam_.config().learning_rate;
  j["critic_lr"] = critic_adam_.config().learning_rate;
  j["update_rng"] = update_rng_.serialize();
  j["envs"] = nlohmann::json::array();
  j["episodes"] = nlohmann::json::array();
  for (std::size_t e = 0; e < envs_.size(); ++e) {
    j["envs"].push_back(envs_[e].serialize_state());
    const EpisodeState& ep = episodes_[e];
    nlohmann::json je;
    je["active_index"] = ep.active_index;
    je["steps"] = ep.steps;
    je["velocity"] = {ep.command.velocity.x(), ep.command.velocity.y(), ep.command.velocity.z()};
    je["prev_action"] = std::vector<double>(ep.prev_action.data(), ep.prev_action.data() + kNumJoints);
    const auto feat = ep.prev_feature.flatten();
    je["prev_feature"] = std::vector<double>(feat.data(), feat.data() + kAmpFeatureDim);
    j["episodes"].push_back(je);
  }
  std::ofstream os(dir / "state.json");
  os << j.dump() << "\n";
  if (!os) throw DataError("save_checkpoint: cannot write " + (dir / "state.json").string());
}

void Trainer::load_checkpoint(const fs::path& dir) {
  Mlp actor = load_network(dir / "actor.net");
  policy_ = GaussianPolicy(std::move(actor), 1.0);
  policy_.log_std() = load_vector(dir / "log_std.vec");
  critic_ = load_network(dir / "critic.net");
  disc_ = load_network(dir / "disc.net");
  skill_disc_ = load_network(dir / "skill_disc.net");
  embedding_ = SkillEmbedding(int(catalog_.size()), cfg_.latent_dim, load_vector(dir / "embedding.vec"));
  normalizer_ = FeatureNormalizer::deserialize(load_vector(dir / "normalizer.vec"));
  load_adam(dir / "adam_policy.vec", policy_adam_);
  load_adam(dir / "adam_critic.vec", critic_adam_);
  load_adam(dir / "adam_disc.vec", disc_adam_);
  load_adam(dir / "adam_skill.vec", skill_adam_);
  load_adam(dir / "adam_embed.vec", embed_adam_);

  std::ifstream is(dir / "state.json");
  if (!is) throw DataError("load_checkpoint: cannot open " + (dir / "state.json").string());
  nlohmann::json j = nlohmann::json::parse(is);
  iteration_ = j.at("iteration").get<int>();
  policy_adam_.config().learning_rate = j.at("policy_lr").get<double>();
  critic_adam_.config().learning_rate = j.at("critic_lr").get<double>();
  update_rng_.deserialize(j.at("update_rng").get<std::string>());
  const auto& envs_json = j.at("envs");
  const auto& eps_json = j.at("episodes");
  if (envs_json.size() != envs_.size()) throw DataError("load_checkpoint: env count mismatch");
  for (std::size_t e = 0; e < envs_.size(); ++e) {
    envs_[e].deserialize_state(envs_json[e].get<std::string>());
    EpisodeState& ep = episodes_[e];
    const auto& je = eps_json[e];
    ep.active_index = je.at("active_index").get<int>();
    ep.steps = je.at("steps").get<int>();
    const auto vel = je.at("velocity").get<std::vector<double>>();
    const Skill& skill = catalog_[std::size_t(cfg_.active_skills[std::size_t(ep.active_index)])];
    (void)skill;
    ep.command = Command::for_skill(ep.active_index, int(cfg_.active_skills.size()),
                                    Vec3(vel[0], vel[1], vel[2]));
    const auto pa = je.at("prev_action").get<std::vector<double>>();
    for (int k = 0; k < kNumJoints; ++k) ep.prev_action[k] = pa[std::size_t(k)];
    const auto pf = je.at("prev_feature").get<std::vector<double>>();
    Eigen::Matrix<double, kAmpFeatureDim, 1> fv;
    for (int k = 0; k < kAmpFeatureDim; ++k) fv[k] = pf[std::size_t(k)];
    ep.prev_feature = AmpFeature::unflatten(fv);
  }
}

void write_trace_csv(const fs::path& path, const std::vector<TraceRow>& rows) {
  std::vector<std::string> cols = {"time", "skill", "vx_cmd", "vy_cmd", "wz_cmd"};
  for (int leg = 0; leg < kNumLegs; ++leg) cols.push_back(std::string("contact_") + kLegNames[leg]);
  for (int j = 0; j < kNumJoints; ++j) cols.push_back("target_" + std::to_string(j));
  for (int j = 0; j < kNumJoints; ++j) cols.push_back("q_" + std::to_string(j));
  cols.insert(cols.end(), {"vx_body", "vy_body", "vz_body", "yaw_rate", "terminated"});
  CsvWriter w(path, cols);
  for (const TraceRow& r : rows) {
    std::vector<double> v = {r.time, double(r.skill_label), r.command.x(), r.command.y(),
                             r.command.z()};
    for (int leg = 0; leg < kNumLegs; ++leg) v.push_back(r.contacts[std::size_t(leg)] ? 1.0 : 0.0);
    for (int j = 0; j < kNumJoints; ++j) v.push_back(r.joint_targets[j]);
    for (int j = 0; j < kNumJoints; ++j) v.push_back(r.joint_positions[j]);
    v.insert(v.end(), {r.base_velocity_body.x(), r.base_velocity_body.y(), r.base_velocity_body.z(),
                       r.yaw_rate, r.terminated ? 1.0 : 0.0});
    w.row(v);
  }
}

std::vector<TraceRow> read_trace_csv(const fs::path& path) {
  const CsvTable t = read_csv(path);
  std::vector<TraceRow> rows;
  const int i_time = t.column_index("time"), i_skill = t.column_index("skill");
  const int i_vx = t.column_index("vx_cmd");
  const int i_c0 = t.column_index("contact_FL");
  const int i_t0 = t.column_index("target_0");
  const int i_q0 = t.column_index("q_0");
  const int i_vb = t.column_index("vx_body");
  const int i_term = t.column_index("terminated");
  for (const auto& r : t.rows) {
    TraceRow row;
    row.time = r[std::size_t(i_time)];
    row.skill_label = int(r[std::size_t(i_skill)]);
    row.command = Vec3(r[std::size_t(i_vx)], r[std::size_t(i_vx + 1)], r[std::size_t(i_vx + 2)]);
    for (int leg = 0; leg < kNumLegs; ++leg) row.contacts[std::size_t(leg)] = r[std::size_t(i_c0 + leg)] != 0.0;
    for (int j = 0; j < kNumJoints; ++j) {
      row.joint_targets[j] = r[std::size_t(i_t0 + j)];
      row.joint_positions[j] = r[std::size_t(i_q0 + j)];
    }
    row.base_velocity_body = Vec3(r[std::size_t(i_vb)], r[std::size_t(i_vb + 1)], r[std::size_t(i_vb + 2)]);
    row.yaw_rate = r[std::size_t(i_vb + 3)];
    row.terminated = r[std::size_t(i_term)] != 0.0;
    rows.push_back(row);
  }
  return rows;
}

std::vector<TraceRow> rollout_policy(const GaussianPolicy& policy, QuadrupedEnv& env,
                                     const SkillSchedule& schedule, const std::vector<Skill>& catalog,
                                     const std::vector<int>& active_skills,
                                     const AblationFlags& ablation) {
  schedule.validate(catalog.size());
  env.reset();
  const double dt = env.config().control_dt;
  const int steps = int(std::lround(schedule.duration / dt));
  std::vector<TraceRow> rows;
  rows.reserve(std::size_t(steps));
  JointVec prev_action = JointVec::Zero();

  for (int k = 0; k < steps; ++k) {
    const double t = k * dt;
    const ScheduleEntry& entry = schedule.entry_at(t);
    const auto it = std::find(active_skills.begin(), active_skills.end(), entry.label);
    if (it == active_skills.end()) {
      throw ConfigError("rollout_policy: scheduled skill " + std::to_string(entry.label) +
                        " not among the policy's active skills");
    }
    const int active_index = int(it - active_skills.begin());
    const Vec3 velocity = entry.velocity.value_or(catalog[std::size_t(entry.label)].spec.command_velocity);
    Command cmd = Command::for_skill(active_index, int(active_skills.size()), velocity);
    if (ablation.no_skill_obs) cmd.skill_onehot.setZero();
    env.set_command_velocity(velocity);

    const VecX obs = env.observation(cmd, prev_action);
    const VecX action = policy.mean(MatX(obs)).col(0);
    const JointVec targets = env.apply_action(action);
    const auto res = env.step_with_targets(targets);

    TraceRow row;
    row.time = t;
    row.skill_label = entry.label;
    row.command = velocity;
    row.contacts = res.contacts;
    row.joint_targets = targets;
    row.joint_positions = env.state().joint_positions;
    row.base_velocity_body = world_to_body(env.state().base_orientation, env.state().base_lin_velocity);
    row.yaw_rate = env.state().base_ang_velocity.z();
    row.terminated = res.terminated;
    rows.push_back(row);
    prev_action = action;
    if (res.terminated) break;
  }
  return rows;
}

}  // namespace camp
