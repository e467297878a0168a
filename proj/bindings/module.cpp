#include "camp/analysis.hpp"
#include "camp/cli.hpp"
#include "camp/config.hpp"
#include "camp/env.hpp"
#include "camp/motion.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace camp;

namespace {

MatX clip_joint_positions(const MotionClip& clip) {
  MatX q(Eigen::Index(clip.frames.size()), kNumJoints);
  for (std::size_t i = 0; i < clip.frames.size(); ++i) {
    q.row(Eigen::Index(i)) = clip.frames[i].joint_positions.transpose();
  }
  return q;
}

MatX clip_amp_features(const MotionClip& clip) {
  const auto feats = amp_features_from_clip(clip);
  MatX out(Eigen::Index(feats.size()), kAmpFeatureDim);
  for (std::size_t i = 0; i < feats.size(); ++i) {
    out.row(Eigen::Index(i)) = feats[i].flatten().transpose();
  }
  return out;
}

ContactMetrics contact_metrics_py(const std::vector<std::array<bool, 4>>& contacts, double freq,
                                  double dt) {
  return contact_metrics(contacts, freq, dt);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "surrogate quadruped gait training core";

  py::register_exception<ConfigError>(m, "ConfigError");
  py::register_exception<DataError>(m, "DataError");
  py::register_exception<NumericError>(m, "NumericError");
  py::register_exception<UnreachableTargetError>(m, "UnreachableTargetError");

  py::class_<GaitSpec>(m, "GaitSpec")
      .def_readonly("frequency", &GaitSpec::frequency)
      .def_readonly("duty_factor", &GaitSpec::duty_factor)
      .def_readonly("phase_offsets", &GaitSpec::phase_offsets)
      .def_readonly("step_length", &GaitSpec::step_length)
      .def_readonly("step_height", &GaitSpec::step_height)
      .def_readonly("body_height", &GaitSpec::body_height)
      .def_property_readonly("command_velocity",
                             [](const GaitSpec& s) { return VecX(s.command_velocity); })
      .def_property_readonly("gait", [](const GaitSpec& s) { return std::string(gait_name(s.gait_id)); });

  py::class_<Skill>(m, "Skill")
      .def_readonly("name", &Skill::name)
      .def_readonly("spec", &Skill::spec);

  m.def("default_skill_catalog", &default_skill_catalog);
  m.def(
      "make_skill_catalog",
      [](const std::vector<std::string>& gaits, const std::vector<double>& freqs) {
        std::vector<GaitId> ids;
        for (const auto& g : gaits) ids.push_back(gait_from_name(g));
        return make_skill_catalog(ids, freqs);
      },
      py::arg("gaits"), py::arg("frequencies_hz"));

  py::class_<MotionClip>(m, "MotionClip")
      .def_readonly("label", &MotionClip::label)
      .def_readonly("dt", &MotionClip::dt)
      .def_property_readonly("num_frames", [](const MotionClip& c) { return c.frames.size(); })
      .def("duration", &MotionClip::duration)
      .def("joint_positions", &clip_joint_positions, "frames x 12 joint angles")
      .def("amp_features", &clip_amp_features, "frames x 43 discriminator features");

  m.def(
      "generate_clip",
      [](const GaitSpec& spec, double duration, double dt, int label) {
        return generate_clip(spec, duration, dt, label);
      },
      py::arg("spec"), py::arg("duration"), py::arg("dt") = 0.02, py::arg("label") = 0);
  m.def("write_clip", &write_clip, py::arg("path"), py::arg("clip"));
  m.def("read_clip", &read_clip, py::arg("path"));

  m.def(
      "leg_inverse_kinematics",
      [](const Vec3& foot, double hip, double thigh, double calf) {
        return Vec3(leg_inverse_kinematics(foot, LegLinkLengths{hip, thigh, calf}));
      },
      py::arg("foot_hip_frame"), py::arg("hip") = 0.0, py::arg("thigh") = 0.213,
      py::arg("calf") = 0.213);
  m.def(
      "leg_forward_kinematics",
      [](const Vec3& joints, double hip, double thigh, double calf) {
        return Vec3(leg_forward_kinematics(joints, LegLinkLengths{hip, thigh, calf}));
      },
      py::arg("joints"), py::arg("hip") = 0.0, py::arg("thigh") = 0.213, py::arg("calf") = 0.213);

  m.def("style_reward_from_value", &style_reward_from_value, py::arg("d"));
  m.def(
      "skill_reward", [](const VecX& z_hat, const VecX& z) { return skill_reward(z_hat, z); },
      py::arg("z_hat"), py::arg("z"));
  m.def(
      "compose_reward",
      [](double task, double style, double skill, double w_task, double w_style, double w_skill) {
        return compose_reward(task, style, skill, RewardWeights{w_task, w_style, w_skill});
      },
      py::arg("task"), py::arg("style"), py::arg("skill"), py::arg("w_task") = 1.0,
      py::arg("w_style") = 1.0, py::arg("w_skill") = 0.3);

  py::class_<Command>(m, "Command")
      .def_static(
          "for_skill",
          [](int index, int count, const Vec3& velocity) {
            return Command::for_skill(index, count, velocity);
          },
          py::arg("skill_index"), py::arg("num_skills"), py::arg("velocity"))
      .def_readonly("skill_index", &Command::skill_index)
      .def_property_readonly("velocity", [](const Command& c) { return VecX(c.velocity); });

  py::class_<QuadrupedEnv>(m, "QuadrupedEnv")
      .def(py::init([](std::uint64_t seed, int index, bool randomize, double control_dt) {
             EnvConfig cfg;
             cfg.control_dt = control_dt;
             if (!randomize) cfg.randomization = DomainRandomizationConfig::disabled();
             return QuadrupedEnv(cfg, seed, index);
           }),
           py::arg("seed") = 0, py::arg("index") = 0, py::arg("randomize") = true,
           py::arg("control_dt") = 0.02)
      .def("reset", &QuadrupedEnv::reset)
      .def("set_command_velocity", &QuadrupedEnv::set_command_velocity)
      .def(
          "step",
          [](QuadrupedEnv& env, const VecX& action) {
            if (action.size() != kNumJoints) throw ConfigError("step: action must have 12 entries");
            const auto res = env.step(JointVec(action));
            return py::make_tuple(res.feature.flatten(), res.contacts, res.terminated);
          },
          py::arg("action"), "returns (amp_feature, contacts, terminated)")
      .def(
          "observation",
          [](const QuadrupedEnv& env, const Command& cmd, const VecX& prev_action) {
            return VecX(env.observation(cmd, JointVec(prev_action)));
          },
          py::arg("command"), py::arg("prev_action"))
      .def("task_reward", [](const QuadrupedEnv& env, const Command& cmd) { return env.task_reward(cmd); })
      .def_property_readonly("time", [](const QuadrupedEnv& env) { return env.state().time; })
      .def_property_readonly("base_height",
                             [](const QuadrupedEnv& env) { return env.state().base_position.z(); })
      .def_property_readonly("joint_positions",
                             [](const QuadrupedEnv& env) { return VecX(env.state().joint_positions); })
      .def_property_readonly("terminated",
                             [](const QuadrupedEnv& env) { return env.state().terminated; });

  m.def("dtw_distance", &dtw_distance, py::arg("a"), py::arg("b"),
        "DTW alignment cost between d x n and d x m sequences");
  m.def(
      "kmeans_purity",
      [](const MatX& features, const std::vector<int>& labels, int k) {
        const KmeansResult r = kmeans_purity(features, labels, k);
        return py::make_tuple(r.assignments, r.purity);
      },
      py::arg("features"), py::arg("labels"), py::arg("k"),
      "k-means over columns of `features`; returns (assignments, purity)");
  m.def("pca_project", &pca_project, py::arg("features"), py::arg("dims") = 2);
  m.def(
      "contact_metrics",
      [](const std::vector<std::array<bool, 4>>& contacts, double freq, double dt) {
        const ContactMetrics cm = contact_metrics_py(contacts, freq, dt);
        return py::make_tuple(cm.duty_factor, cm.phase_offset);
      },
      py::arg("contacts"), py::arg("frequency_hz"), py::arg("dt") = 0.02,
      "returns (duty_factor per leg, phase offset per leg relative to FL)");
  m.def("tracking_accuracy", &tracking_accuracy, py::arg("target"), py::arg("actual"));

  m.def(
      "generate_data",
      [](const std::string& config_json, const std::filesystem::path& out_dir, std::uint64_t seed,
         bool force) {
        ExperimentConfig cfg =
            config_json.empty() ? ExperimentConfig{} : ExperimentConfig::from_json(config_json);
        cli::cmd_generate_data(cfg, out_dir, seed, force);
      },
      py::arg("config_json") = "", py::arg("out_dir"), py::arg("seed") = 0, py::arg("force") = false);
  m.def(
      "train",
      [](const std::string& config_json, const std::filesystem::path& data_dir,
         const std::filesystem::path& out_dir, bool resume) {
        ExperimentConfig cfg =
            config_json.empty() ? ExperimentConfig{} : ExperimentConfig::from_json(config_json);
        cli::cmd_train(cfg, data_dir, out_dir, resume, /*quiet=*/true);
      },
      py::arg("config_json") = "", py::arg("data_dir"), py::arg("out_dir"),
      py::arg("resume") = false);
  m.def("default_config_json", []() { return ExperimentConfig{}.to_json(); });
}
