#include "camp/cli.hpp"

#include "camp/analysis.hpp"
#include "camp/checkpoint.hpp"
#include "camp/csv.hpp"
#include "camp/errors.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <fstream>
#include <set>
#include <iostream>

namespace camp::cli {

namespace fs = std::filesystem;
using nlohmann::json;

void cmd_generate_data(const ExperimentConfig& cfg, const fs::path& out_dir, std::uint64_t seed,
                       bool force) {
  const std::vector<Skill> catalog = cfg.catalog();
  if (fs::exists(out_dir / "manifest.json") && !force) {
    throw DataError("generate-data: " + out_dir.string() + " already contains a clip store (use --force)");
  }
  fs::create_directories(out_dir);

  json manifest;
  manifest["version"] = 1;
  manifest["seed"] = seed;
  manifest["dt"] = cfg.dataset.dt;
  manifest["duration_s"] = cfg.dataset.duration_s;
  manifest["skills"] = json::array();
  for (std::size_t label = 0; label < catalog.size(); ++label) {
    const Skill& skill = catalog[label];
    const MotionClip clip =
        generate_clip(skill.spec, cfg.dataset.duration_s, cfg.dataset.dt, int(label));
    char filename[64];
    std::snprintf(filename, sizeof(filename), "clip_%03zu_%s.clip", label, skill.name.c_str());
    write_clip(out_dir / filename, clip);
    manifest["skills"].push_back({{"label", label},
                                  {"name", skill.name},
                                  {"gait", gait_name(skill.spec.gait_id)},
                                  {"frequency_hz", skill.spec.frequency},
                                  {"file", filename},
                                  {"frames", clip.frames.size()}});
  }
  std::ofstream os(out_dir / "manifest.json");
  os << manifest.dump(2) << "\n";
  if (!os) throw DataError("generate-data: cannot write manifest");
  ExperimentConfig resolved = cfg;
  resolved.save(out_dir / "dataset_config.json");
}

LoadedDataset load_dataset(const fs::path& data_dir) {
  std::ifstream is(data_dir / "manifest.json");
  if (!is) throw DataError("load_dataset: no manifest.json in " + data_dir.string());
  json manifest = json::parse(is);
  LoadedDataset ds;
  ds.seed = manifest.at("seed").get<std::uint64_t>();
  for (const auto& s : manifest.at("skills")) {
    Skill skill;
    skill.name = s.at("name").get<std::string>();
    skill.spec = default_gait_spec(gait_from_name(s.at("gait").get<std::string>()),
                                   s.at("frequency_hz").get<double>());
    ds.catalog.push_back(skill);
    ds.clips.push_back(read_clip(data_dir / s.at("file").get<std::string>()));
    if (ds.clips.back().label != int(ds.catalog.size()) - 1) {
      throw DataError("load_dataset: clip label does not match manifest order");
    }
  }
  if (ds.clips.empty()) throw DataError("load_dataset: empty clip store");
  return ds;
}

void cmd_train(const ExperimentConfig& cfg, const fs::path& data_dir, const fs::path& out_dir,
               bool resume, bool quiet) {
  LoadedDataset ds = load_dataset(data_dir);
  TrainerConfig tc = cfg.trainer_config();

  Rng preload_rng = Rng::derive(tc.seed, 3000);
  TransitionBuffer expert =
      preload_transitions(ds.clips, std::size_t(cfg.dataset.transitions_per_clip), preload_rng);

  Trainer trainer(tc, ds.catalog, std::move(expert));
  if (resume) {
    const fs::path final_ckpt = out_dir / "checkpoint_final";
    fs::path best;
    if (fs::exists(final_ckpt / "state.json")) {
      best = final_ckpt;
    } else if (fs::exists(out_dir)) {
      for (const auto& entry : fs::directory_iterator(out_dir)) {
        if (entry.is_directory() && entry.path().filename().string().rfind("checkpoint_", 0) == 0 &&
            fs::exists(entry.path() / "state.json")) {
          if (best.empty() || entry.path().filename() > best.filename()) best = entry.path();
        }
      }
    }
    if (best.empty()) throw DataError("train --resume: no checkpoint found in " + out_dir.string());
    trainer.load_checkpoint(best);
    if (!quiet) std::cout << "resumed from " << best << " at iteration " << trainer.iteration() << "\n";
  }
  fs::create_directories(out_dir);
  cfg.save(out_dir / "experiment_config.json");
  trainer.train(out_dir, [&](const IterationStats& s) {
    if (!quiet && (s.iteration % 10 == 0 || s.iteration + 1 == cfg.trainer.iterations)) {
      std::cout << "iter " << s.iteration << " task " << s.mean_task << " style " << s.mean_style
                << " skill " << s.mean_skill << " disc " << s.disc_loss << " kl " << s.ppo.approx_kl
                << "\n";
    }
  });
}

namespace {

SkillSchedule load_schedule(const fs::path& path, const ExperimentConfig& cfg) {
  std::ifstream is(path);
  if (!is) throw DataError("rollout: cannot open schedule " + path.string());
  json j = json::parse(is);
  SkillSchedule schedule;
  if (j.contains("duration_s")) schedule.duration = j.at("duration_s").get<double>();
  for (const auto& e : j.at("entries")) {
    ScheduleEntry entry;
    entry.time = e.at("time").get<double>();
    if (e.at("skill").is_string()) {
      entry.label = cfg.label_of(e.at("skill").get<std::string>());
    } else {
      entry.label = e.at("skill").get<int>();
    }
    if (e.contains("velocity")) {
      const auto v = e.at("velocity").get<std::vector<double>>();
      if (v.size() != 3) throw ConfigError("rollout: velocity needs 3 entries");
      entry.velocity = Vec3(v[0], v[1], v[2]);
    }
    schedule.entries.push_back(entry);
  }
  schedule.validate(cfg.catalog().size());
  return schedule;
}

struct LoadedRun {
  GaussianPolicy policy;
  std::vector<int> active_skills;
  AblationFlags flags;
};

LoadedRun load_run(const fs::path& run_dir) {
  const fs::path ckpt = run_dir / "checkpoint_final";
  if (!fs::exists(ckpt / "actor.net")) {
    throw DataError("no checkpoint_final under " + run_dir.string());
  }
  std::ifstream is(run_dir / "resolved_config.json");
  if (!is) throw DataError("no resolved_config.json under " + run_dir.string());
  json j = json::parse(is);
  LoadedRun run{GaussianPolicy(load_network(ckpt / "actor.net"), 1.0),
                j.at("active_skills").get<std::vector<int>>(),
                {}};
  run.policy.log_std() = load_vector(ckpt / "log_std.vec");
  run.flags.no_skill_obs = j.at("ablation").at("no_skill_obs").get<bool>();
  return run;
}

}  // namespace

void cmd_rollout(const ExperimentConfig& cfg, const fs::path& run_dir, const fs::path& schedule_path,
                 const fs::path& out_trace, std::uint64_t seed) {
  const SkillSchedule schedule = load_schedule(schedule_path, cfg);
  LoadedRun run = load_run(run_dir);
  EnvConfig env_cfg = cfg.environment;
  env_cfg.randomization = DomainRandomizationConfig::disabled();
  QuadrupedEnv env(env_cfg, seed, 0);
  const auto trace =
      rollout_policy(run.policy, env, schedule, cfg.catalog(), run.active_skills, run.flags);
  write_trace_csv(out_trace, trace);
  std::cout << "wrote " << trace.size() << " rows to " << out_trace << "\n";
}

void cmd_analyze(const ExperimentConfig& cfg, const std::string& kind, const fs::path& run_dir,
                 const fs::path& data_dir, const fs::path& input_trace, const fs::path& out_path) {
  if (kind == "dtw" || kind == "clusters") {
    LoadedDataset ds = load_dataset(data_dir);
    const fs::path ckpt = run_dir / "checkpoint_final";
    const Mlp skill_disc = load_network(ckpt / "skill_disc.net");
    const FeatureNormalizer normalizer =
        FeatureNormalizer::deserialize(load_vector(ckpt / "normalizer.vec"));

    auto seqs = latent_sequences(ds.clips, skill_disc, normalizer);
    standardize_latents(seqs);

    if (kind == "dtw") {
      const MatX dist = dtw_matrix(seqs, cfg.analysis.dtw_stride);
      std::ofstream os(out_path);
      if (!os) throw DataError("analyze: cannot write " + out_path.string());
      os << "skill";
      for (const auto& s : seqs) os << "," << ds.catalog[std::size_t(s.label)].name;
      os << "\n";
      os.precision(12);
      for (Eigen::Index i = 0; i < dist.rows(); ++i) {
        os << ds.catalog[std::size_t(seqs[std::size_t(i)].label)].name;
        for (Eigen::Index j = 0; j < dist.cols(); ++j) os << "," << dist(i, j);
        os << "\n";
      }
      std::cout << "wrote " << dist.rows() << "x" << dist.cols() << " DTW matrix to " << out_path << "\n";
      return;
    }

    // clusters: pool per-transition latents, ground truth = gait class
    Eigen::Index total = 0;
    for (const auto& s : seqs) total += s.latents.cols();
    MatX features(seqs.front().latents.rows(), total);
    std::vector<int> gait_labels(static_cast<std::size_t>(total));
    std::vector<int> skill_labels(static_cast<std::size_t>(total));
    Eigen::Index at = 0;
    std::vector<int> gait_of_label(ds.catalog.size());
    for (std::size_t l = 0; l < ds.catalog.size(); ++l) {
      gait_of_label[l] = int(ds.catalog[l].spec.gait_id);
    }
    for (const auto& s : seqs) {
      for (Eigen::Index c = 0; c < s.latents.cols(); ++c) {
        features.col(at) = s.latents.col(c);
        gait_labels[std::size_t(at)] = gait_of_label[std::size_t(s.label)];
        skill_labels[std::size_t(at)] = s.label;
        ++at;
      }
    }
    std::set<int> distinct(gait_labels.begin(), gait_labels.end());
    const KmeansResult km = kmeans_purity(features, gait_labels, int(distinct.size()));
    CsvWriter w(out_path, {"sample", "skill_label", "gait_label", "cluster"});
    for (Eigen::Index i = 0; i < total; ++i) {
      w.row({double(i), double(skill_labels[std::size_t(i)]), double(gait_labels[std::size_t(i)]),
             double(km.assignments[std::size_t(i)])});
    }
    std::cout << "kmeans purity " << km.purity << " over " << total << " samples, k="
              << distinct.size() << "; assignments in " << out_path << "\n";
    return;
  }

  if (kind == "contacts") {
    const auto trace = read_trace_csv(input_trace);
    if (trace.empty()) throw DataError("analyze contacts: empty trace");
    const int label = trace.front().skill_label;
    const double freq = cfg.catalog().at(std::size_t(label)).spec.frequency;
    std::vector<std::array<bool, kNumLegs>> contacts;
    for (const auto& r : trace) contacts.push_back(r.contacts);
    const ContactMetrics m = contact_metrics(contacts, freq, cfg.environment.control_dt);
    CsvWriter w(out_path, {"leg", "duty_factor", "phase_offset"});
    for (int leg = 0; leg < kNumLegs; ++leg) {
      w.row({double(leg), m.duty_factor[std::size_t(leg)], m.phase_offset[std::size_t(leg)]});
      std::cout << kLegNames[leg] << " duty " << m.duty_factor[std::size_t(leg)] << " offset "
                << m.phase_offset[std::size_t(leg)] << "\n";
    }
    return;
  }

  if (kind == "tracking") {
    const auto trace = read_trace_csv(input_trace);
    if (trace.empty()) throw DataError("analyze tracking: empty trace");
    MatX target(kNumJoints, Eigen::Index(trace.size())), actual(kNumJoints, Eigen::Index(trace.size()));
    for (std::size_t i = 0; i < trace.size(); ++i) {
      target.col(Eigen::Index(i)) = trace[i].joint_targets;
      actual.col(Eigen::Index(i)) = trace[i].joint_positions;
    }
    const double acc = tracking_accuracy(target, actual);
    std::cout << "tracking accuracy " << acc << "%\n";
    if (!out_path.empty()) {
      CsvWriter w(out_path, {"tracking_accuracy_percent"});
      w.row({acc});
    }
    return;
  }

  throw ConfigError("analyze: unknown kind '" + kind + "' (dtw|clusters|contacts|tracking)");
}

bool cmd_ablate(const ExperimentConfig& cfg, const fs::path& data_dir, const fs::path& out_dir,
                bool quiet) {
  struct Variant {
    const char* name;
    const char* dir;
    AblationFlags flags;
  };
  const Variant variants[] = {
      {"Ours", "full", {}},
      {"Ours w/o g^t", "no_skill_obs", {.no_skill_obs = true}},
      {"Ours w/o z^p", "no_conditioning", {.no_conditioning = true}},
      {"Ours w/o r^skill", "no_skill_reward", {.no_skill_reward = true}},
      {"Baseline", "baseline",
       {.no_skill_obs = true, .no_conditioning = true, .no_skill_disc = true, .no_skill_reward = true}},
  };

  fs::create_directories(out_dir);
  std::vector<std::pair<std::string, fs::path>> runs;
  for (const Variant& v : variants) {
    const fs::path run_dir = out_dir / v.dir;
    runs.emplace_back(v.name, run_dir);
    if (fs::exists(run_dir / "checkpoint_final" / "state.json")) {
      if (!quiet) std::cout << "[" << v.name << "] already trained, skipping\n";
      continue;
    }
    ExperimentConfig run_cfg = cfg;
    run_cfg.ablation = v.flags;  // same seed for every run by construction
    try {
      if (!quiet) std::cout << "[" << v.name << "] training...\n";
      cmd_train(run_cfg, data_dir, run_dir, /*resume=*/false, quiet);
    } catch (const std::exception& e) {
      std::cerr << "[" << v.name << "] failed: " << e.what() << "\n";
    }
  }

  const AblationReport report =
      ablation_report(runs, cfg.catalog(), cfg.environment, cfg.trainer.seed + 777);
  const std::string table = report.to_table();
  std::cout << table;
  std::ofstream os(out_dir / "ablation_report.txt");
  os << table;
  return report.complete();
}

int run(int argc, char** argv) {
  CLI::App app{"conditional adversarial motion-prior training on a surrogate quadruped"};
  app.require_subcommand(1);

  std::string config_path, out_dir, data_dir, schedule_path, trace_path, kind, run_dir;
  std::uint64_t seed = 0;
  bool have_seed = false, force = false, resume = false, quiet = false;
  int envs_override = -1, iters_override = -1;
  AblationFlags flag_overrides;
  bool no_skill_obs = false, no_conditioning = false, no_skill_disc = false, no_skill_reward = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "experiment config JSON");
    cmd->add_option("--seed", seed, "root seed override")->each([&](const std::string&) { have_seed = true; });
  };

  CLI::App* gen = app.add_subcommand("generate-data", "synthesize the expert clip store");
  add_common(gen);
  gen->add_option("--out-dir", out_dir, "output directory")->required();
  gen->add_flag("--force", force, "overwrite an existing store");

  CLI::App* train = app.add_subcommand("train", "train a policy");
  add_common(train);
  train->add_option("--data-dir", data_dir, "clip store directory")->required();
  train->add_option("--out-dir", out_dir, "run output directory")->required();
  train->add_flag("--resume", resume, "continue from the latest checkpoint");
  train->add_flag("--quiet", quiet, "suppress progress output");
  train->add_option("--envs", envs_override, "override parallel environment count");
  train->add_option("--iters", iters_override, "override iteration count");
  train->add_flag("--no-skill-obs", no_skill_obs, "ablation: zero the skill one-hot observation");
  train->add_flag("--no-conditioning", no_conditioning, "ablation: unconditioned discriminator");
  train->add_flag("--no-skill-disc", no_skill_disc, "ablation: remove the skill discriminator");
  train->add_flag("--no-skill-reward", no_skill_reward, "ablation: zero skill reward weight");

  CLI::App* rollout = app.add_subcommand("rollout", "roll out a trained policy under a skill schedule");
  add_common(rollout);
  rollout->add_option("--run-dir", run_dir, "training run directory")->required();
  rollout->add_option("--schedule", schedule_path, "skill schedule JSON")->required();
  rollout->add_option("--out", trace_path, "output trace CSV")->required();

  CLI::App* analyze = app.add_subcommand("analyze", "dtw | clusters | contacts | tracking");
  add_common(analyze);
  analyze->add_option("kind", kind, "analysis kind")->required();
  analyze->add_option("--run-dir", run_dir, "training run directory (dtw, clusters)");
  analyze->add_option("--data-dir", data_dir, "clip store directory (dtw, clusters)");
  analyze->add_option("--trace", trace_path, "rollout trace CSV (contacts, tracking)");
  analyze->add_option("--out", out_dir, "output file");

  CLI::App* ablate = app.add_subcommand("ablate", "run the five-variant comparison");
  add_common(ablate);
  ablate->add_option("--data-dir", data_dir, "clip store directory")->required();
  ablate->add_option("--out-dir", out_dir, "output directory")->required();
  ablate->add_flag("--quiet", quiet, "suppress progress output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }

  try {
    ExperimentConfig cfg =
        config_path.empty() ? ExperimentConfig{} : ExperimentConfig::load(config_path);
    if (have_seed) cfg.trainer.seed = seed;
    if (envs_override > 0) cfg.trainer.num_envs = envs_override;
    if (iters_override >= 0) cfg.trainer.iterations = iters_override;
    cfg.ablation.no_skill_obs |= no_skill_obs;
    cfg.ablation.no_conditioning |= no_conditioning;
    cfg.ablation.no_skill_disc |= no_skill_disc;
    cfg.ablation.no_skill_reward |= no_skill_reward;

    if (gen->parsed()) {
      cmd_generate_data(cfg, out_dir, cfg.trainer.seed, force);
    } else if (train->parsed()) {
      cmd_train(cfg, data_dir, out_dir, resume, quiet);
    } else if (rollout->parsed()) {
      cmd_rollout(cfg, run_dir, schedule_path, trace_path, cfg.trainer.seed + 777);
    } else if (analyze->parsed()) {
      cmd_analyze(cfg, kind, run_dir, data_dir, trace_path, out_dir);
    } else if (ablate->parsed()) {
      if (!cmd_ablate(cfg, data_dir, out_dir, quiet)) {
        std::cerr << "ablate: missing rows in the comparison\n";
        return kExitData;
      }
    }
    return kExitOk;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const UnreachableTargetError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
}

}  // namespace camp::cli
