#include "camp/config.hpp"

#include "camp/errors.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <set>

namespace camp {

namespace {

using nlohmann::json;

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& context) {
  if (!j.is_object()) throw ConfigError("config: expected an object at " + context);
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!allowed.count(key)) throw ConfigError("config: unknown key '" + key + "' in " + context);
  }
}

template <typename T>
void maybe(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void maybe_range(const json& j, const char* key, std::array<double, 2>& out) {
  if (j.contains(key)) {
    const auto v = j.at(key).get<std::vector<double>>();
    if (v.size() != 2) throw ConfigError(std::string("config: range '") + key + "' needs [min, max]");
    out = {v[0], v[1]};
  }
}

}  // namespace

std::vector<Skill> ExperimentConfig::catalog() const {
  std::vector<GaitId> gaits;
  for (const std::string& g : dataset.gaits) gaits.push_back(gait_from_name(g));
  return make_skill_catalog(gaits, dataset.frequencies_hz);
}

int ExperimentConfig::label_of(const std::string& skill_name) const {
  const auto cat = catalog();
  for (std::size_t i = 0; i < cat.size(); ++i) {
    if (cat[i].name == skill_name) return int(i);
  }
  throw ConfigError("config: unknown skill '" + skill_name + "' for this dataset");
}

TrainerConfig ExperimentConfig::trainer_config() const {
  TrainerConfig tc;
  tc.ppo.gamma = trainer.gamma;
  tc.ppo.gae_lambda = trainer.gae_lambda;
  tc.ppo.clip_ratio = trainer.clip_ratio;
  tc.ppo.epochs = trainer.epochs;
  tc.ppo.minibatch_size = trainer.minibatch_size;
  tc.ppo.learning_rate = trainer.learning_rate;
  tc.ppo.adaptive_lr = trainer.adaptive_lr;
  tc.ppo.horizon = trainer.horizon;
  tc.ppo.num_envs = trainer.num_envs;
  tc.ppo.entropy_coef = trainer.entropy_coef;
  tc.ppo.initial_action_std = trainer.initial_action_std;
  tc.rewards = trainer.reward_weights;
  tc.env = environment;
  tc.latent_dim = trainer.latent_dim;
  tc.omega_gp = trainer.omega_gp;
  tc.lambda_gp = trainer.lambda_gp;
  tc.disc_learning_rate = trainer.disc_learning_rate;
  tc.disc_batch = trainer.disc_batch;
  tc.normalizer_warmup_fraction = trainer.normalizer_warmup_fraction;
  tc.iterations = trainer.iterations;
  tc.checkpoint_every = trainer.checkpoint_every;
  tc.episode_seconds = trainer.episode_seconds;
  tc.ablation = ablation;
  tc.seed = trainer.seed;
  for (const std::string& name : trainer.active_skills) tc.active_skills.push_back(label_of(name));
  return tc;
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: JSON parse error: ") + e.what());
  }
  check_keys(j, {"dataset", "environment", "trainer", "ablation", "analysis"}, "top level");

  ExperimentConfig cfg;
  try {
    if (j.contains("dataset")) {
      const json& d = j.at("dataset");
      check_keys(d, {"gaits", "frequencies_hz", "duration_s", "dt", "transitions_per_clip"}, "dataset");
      maybe(d, "gaits", cfg.dataset.gaits);
      maybe(d, "frequencies_hz", cfg.dataset.frequencies_hz);
      maybe(d, "duration_s", cfg.dataset.duration_s);
      maybe(d, "dt", cfg.dataset.dt);
      maybe(d, "transitions_per_clip", cfg.dataset.transitions_per_clip);
    }
    if (j.contains("environment")) {
      const json& e = j.at("environment");
      check_keys(e,
                 {"control_dt", "substeps", "actuator_lag_s", "height_termination_fraction",
                  "tilt_termination_rad", "base_tracking_tau", "randomization"},
                 "environment");
      maybe(e, "control_dt", cfg.environment.control_dt);
      maybe(e, "substeps", cfg.environment.substeps);
      maybe(e, "actuator_lag_s", cfg.environment.actuator_lag);
      maybe(e, "height_termination_fraction", cfg.environment.height_termination_fraction);
      maybe(e, "tilt_termination_rad", cfg.environment.tilt_termination);
      maybe(e, "base_tracking_tau", cfg.environment.base_tracking_tau);
      if (e.contains("randomization")) {
        const json& r = e.at("randomization");
        check_keys(r,
                   {"enabled", "link_mass_scale", "payload_mass", "payload_position",
                    "ground_friction", "motor_strength_scale", "joint_kp", "joint_kd",
                    "initial_joint_scale"},
                   "environment.randomization");
        auto& rc = cfg.environment.randomization;
        maybe(r, "enabled", rc.enabled);
        maybe_range(r, "link_mass_scale", rc.link_mass_scale);
        maybe_range(r, "payload_mass", rc.payload_mass);
        maybe_range(r, "payload_position", rc.payload_position);
        maybe_range(r, "ground_friction", rc.ground_friction);
        maybe_range(r, "motor_strength_scale", rc.motor_strength_scale);
        maybe_range(r, "joint_kp", rc.joint_kp);
        maybe_range(r, "joint_kd", rc.joint_kd);
        maybe_range(r, "initial_joint_scale", rc.initial_joint_scale);
      }
    }
    if (j.contains("trainer")) {
      const json& t = j.at("trainer");
      check_keys(t,
                 {"iterations", "num_envs", "horizon", "gamma", "gae_lambda", "clip_ratio",
                  "epochs", "minibatch_size", "learning_rate", "adaptive_lr", "entropy_coef",
                  "initial_action_std", "reward_weights", "latent_dim", "omega_gp", "lambda_gp",
                  "disc_learning_rate", "disc_batch", "normalizer_warmup_fraction",
                  "episode_seconds", "checkpoint_every", "active_skills", "seed"},
                 "trainer");
      auto& tr = cfg.trainer;
      maybe(t, "iterations", tr.iterations);
      maybe(t, "num_envs", tr.num_envs);
      maybe(t, "horizon", tr.horizon);
      maybe(t, "gamma", tr.gamma);
      maybe(t, "gae_lambda", tr.gae_lambda);
      maybe(t, "clip_ratio", tr.clip_ratio);
      maybe(t, "epochs", tr.epochs);
      maybe(t, "minibatch_size", tr.minibatch_size);
      maybe(t, "learning_rate", tr.learning_rate);
      maybe(t, "adaptive_lr", tr.adaptive_lr);
      maybe(t, "entropy_coef", tr.entropy_coef);
      maybe(t, "initial_action_std", tr.initial_action_std);
      if (t.contains("reward_weights")) {
        const json& w = t.at("reward_weights");
        check_keys(w, {"task", "style", "skill"}, "trainer.reward_weights");
        maybe(w, "task", tr.reward_weights.task);
        maybe(w, "style", tr.reward_weights.style);
        maybe(w, "skill", tr.reward_weights.skill);
      }
      maybe(t, "latent_dim", tr.latent_dim);
      maybe(t, "omega_gp", tr.omega_gp);
      maybe(t, "lambda_gp", tr.lambda_gp);
      maybe(t, "disc_learning_rate", tr.disc_learning_rate);
      maybe(t, "disc_batch", tr.disc_batch);
      maybe(t, "normalizer_warmup_fraction", tr.normalizer_warmup_fraction);
      maybe(t, "episode_seconds", tr.episode_seconds);
      maybe(t, "checkpoint_every", tr.checkpoint_every);
      maybe(t, "active_skills", tr.active_skills);
      maybe(t, "seed", tr.seed);
    }
    if (j.contains("ablation")) {
      const json& a = j.at("ablation");
      check_keys(a, {"no_skill_obs", "no_conditioning", "no_skill_disc", "no_skill_reward"},
                 "ablation");
      maybe(a, "no_skill_obs", cfg.ablation.no_skill_obs);
      maybe(a, "no_conditioning", cfg.ablation.no_conditioning);
      maybe(a, "no_skill_disc", cfg.ablation.no_skill_disc);
      maybe(a, "no_skill_reward", cfg.ablation.no_skill_reward);
    }
    if (j.contains("analysis")) {
      const json& a = j.at("analysis");
      check_keys(a, {"dtw_stride"}, "analysis");
      maybe(a, "dtw_stride", cfg.analysis.dtw_stride);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }

  // fail fast on inconsistent values
  cfg.catalog();
  if (cfg.dataset.dt <= 0.0 || cfg.dataset.duration_s <= 0.0) {
    throw ConfigError("config: dataset dt and duration must be > 0");
  }
  if (cfg.dataset.transitions_per_clip < 1) {
    throw ConfigError("config: transitions_per_clip must be >= 1");
  }
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("config: cannot open " + path.string());
  std::string text((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return from_json(text);
}

std::string ExperimentConfig::to_json() const {
  json j;
  j["dataset"] = {{"gaits", dataset.gaits},
                  {"frequencies_hz", dataset.frequencies_hz},
                  {"duration_s", dataset.duration_s},
                  {"dt", dataset.dt},
                  {"transitions_per_clip", dataset.transitions_per_clip}};
  j["environment"] = {
      {"control_dt", environment.control_dt},
      {"substeps", environment.substeps},
      {"actuator_lag_s", environment.actuator_lag},
      {"height_termination_fraction", environment.height_termination_fraction},
      {"tilt_termination_rad", environment.tilt_termination},
      {"base_tracking_tau", environment.base_tracking_tau},
      {"randomization",
       {{"enabled", environment.randomization.enabled},
        {"link_mass_scale", environment.randomization.link_mass_scale},
        {"payload_mass", environment.randomization.payload_mass},
        {"payload_position", environment.randomization.payload_position},
        {"ground_friction", environment.randomization.ground_friction},
        {"motor_strength_scale", environment.randomization.motor_strength_scale},
        {"joint_kp", environment.randomization.joint_kp},
        {"joint_kd", environment.randomization.joint_kd},
        {"initial_joint_scale", environment.randomization.initial_joint_scale}}}};
  j["trainer"] = {{"iterations", trainer.iterations},
                  {"num_envs", trainer.num_envs},
                  {"horizon", trainer.horizon},
                  {"gamma", trainer.gamma},
                  {"gae_lambda", trainer.gae_lambda},
                  {"clip_ratio", trainer.clip_ratio},
                  {"epochs", trainer.epochs},
                  {"minibatch_size", trainer.minibatch_size},
                  {"learning_rate", trainer.learning_rate},
                  {"adaptive_lr", trainer.adaptive_lr},
                  {"entropy_coef", trainer.entropy_coef},
                  {"initial_action_std", trainer.initial_action_std},
                  {"reward_weights",
                   {{"task", trainer.reward_weights.task},
                    {"style", trainer.reward_weights.style},
                    {"skill", trainer.reward_weights.skill}}},
                  {"latent_dim", trainer.latent_dim},
                  {"omega_gp", trainer.omega_gp},
                  {"lambda_gp", trainer.lambda_gp},
                  {"disc_learning_rate", trainer.disc_learning_rate},
                  {"disc_batch", trainer.disc_batch},
                  {"normalizer_warmup_fraction", trainer.normalizer_warmup_fraction},
                  {"episode_seconds", trainer.episode_seconds},
                  {"checkpoint_every", trainer.checkpoint_every},
                  {"active_skills", trainer.active_skills},
                  {"seed", trainer.seed}};
  j["ablation"] = {{"no_skill_obs", ablation.no_skill_obs},
                   {"no_conditioning", ablation.no_conditioning},
                   {"no_skill_disc", ablation.no_skill_disc},
                   {"no_skill_reward", ablation.no_skill_reward}};
  j["analysis"] = {{"dtw_stride", analysis.dtw_stride}};
  return j.dump(2);
}

void ExperimentConfig::save(const std::filesystem::path& path) const {
  std::ofstream os(path);
  if (!os) throw DataError("config: cannot write " + path.string());
  os << to_json() << "\n";
}

}  // namespace camp
