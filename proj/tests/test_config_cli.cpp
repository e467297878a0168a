#include "camp/cli.hpp"
#include "camp/config.hpp"
#include "camp/csv.hpp"
#include "camp/errors.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace camp;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

// config small enough for in-process end-to-end runs
ExperimentConfig tiny_experiment() {
  ExperimentConfig cfg;
  cfg.dataset.gaits = {"trot", "pronk"};
  cfg.dataset.frequencies_hz = {2.0};
  cfg.dataset.duration_s = 1.0;
  cfg.dataset.transitions_per_clip = 40;
  cfg.trainer.iterations = 2;
  cfg.trainer.num_envs = 4;
  cfg.trainer.horizon = 8;
  cfg.trainer.minibatch_size = 16;
  cfg.trainer.disc_batch = 16;
  cfg.trainer.episode_seconds = 2.0;
  cfg.trainer.active_skills = {"trot_2Hz", "pronk_2Hz"};
  cfg.trainer.checkpoint_every = 0;
  return cfg;
}

}  // namespace

TEST_SUITE("config_cli") {

TEST_CASE("defaults parse, serialize and round-trip") {
  const ExperimentConfig def;
  const ExperimentConfig parsed = ExperimentConfig::from_json(def.to_json());
  CHECK(parsed.to_json() == def.to_json());
  CHECK(parsed.dataset.gaits.size() == 4);
  CHECK(parsed.catalog().size() == 8);
  CHECK(parsed.label_of("pace_4Hz") == 3);
  CHECK_THROWS_AS(parsed.label_of("moonwalk_2Hz"), ConfigError);
}

TEST_CASE("unknown keys are rejected at every level") {
  CHECK_THROWS_AS(ExperimentConfig::from_json(R"({"surprise": 1})"), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::from_json(R"({"dataset": {"gait": ["trot"]}})"), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::from_json(R"({"trainer": {"lr": 0.1}})"), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::from_json(R"({"ablation": {"no_everything": true}})"),
                  ConfigError);
  CHECK_THROWS_AS(
      ExperimentConfig::from_json(R"({"environment": {"randomization": {"frictoin": [0, 1]}}})"),
      ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::from_json("not json at all"), ConfigError);
}

TEST_CASE("invalid values are rejected") {
  CHECK_THROWS_AS(ExperimentConfig::from_json(R"({"dataset": {"gaits": ["sprint"]}})"), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::from_json(R"({"dataset": {"dt": 0.0}})"), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::from_json(R"({"dataset": {"transitions_per_clip": 0}})"),
                  ConfigError);
  CHECK_THROWS_AS(
      ExperimentConfig::from_json(R"({"environment": {"randomization": {"payload_mass": [1]}}})"),
      ConfigError);
}

TEST_CASE("generate-data: expected clip count, refusal without force, seed-identical bytes") {
  TempDir dir("camp_cli_gen");
  const ExperimentConfig cfg;  // default: 4 gaits x 2 frequencies
  cli::cmd_generate_data(cfg, dir.path, 7, false);
  int clip_files = 0;
  for (const auto& e : fs::directory_iterator(dir.path)) {
    if (e.path().extension() == ".clip") ++clip_files;
  }
  CHECK(clip_files == 8);

  CHECK_THROWS_AS(cli::cmd_generate_data(cfg, dir.path, 7, false), DataError);

  // byte-identical regeneration under the same seed
  auto file_bytes = [](const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  };
  const std::string before = file_bytes(dir.path / "clip_000_trot_2Hz.clip");
  cli::cmd_generate_data(cfg, dir.path, 7, true);
  CHECK(file_bytes(dir.path / "clip_000_trot_2Hz.clip") == before);

  const cli::LoadedDataset ds = cli::load_dataset(dir.path);
  CHECK(ds.catalog.size() == 8);
  CHECK(ds.clips[3].label == 3);
}

TEST_CASE("empty gait list is a config error") {
  CHECK_THROWS_AS(ExperimentConfig::from_json(R"({"dataset": {"gaits": []}})"), ConfigError);
}

TEST_CASE("train + rollout + analyze run end to end on a tiny config") {
  TempDir data("camp_cli_data");
  TempDir run("camp_cli_run");
  TempDir out("camp_cli_out");
  const ExperimentConfig cfg = tiny_experiment();
  cli::cmd_generate_data(cfg, data.path, 3, false);
  cli::cmd_train(cfg, data.path, run.path, false, /*quiet=*/true);

  CHECK(fs::exists(run.path / "checkpoint_final" / "actor.net"));
  CHECK(fs::exists(run.path / "metrics.csv"));
  const CsvTable metrics = read_csv(run.path / "metrics.csv");
  CHECK(metrics.rows.size() == 2);
  CHECK(metrics.columns[metrics.column_index("style")] == "style");

  // resume continues the iteration numbering
  ExperimentConfig more = cfg;
  more.trainer.iterations = 3;
  cli::cmd_train(more, data.path, run.path, true, true);
  const CsvTable metrics2 = read_csv(run.path / "metrics.csv");
  CHECK(metrics2.rows.size() == 3);
  CHECK(metrics2.rows.back()[0] == doctest::Approx(2.0));

  // rollout under a two-switch schedule
  const fs::path schedule = out.path / "schedule.json";
  {
    std::ofstream os(schedule);
    os << R"({"duration_s": 4.0, "entries": [
      {"time": 0.0, "skill": "trot_2Hz"},
      {"time": 2.0, "skill": "pronk_2Hz"}
    ]})";
  }
  const fs::path trace = out.path / "trace.csv";
  cli::cmd_rollout(cfg, run.path, schedule, trace, 5);
  const auto rows = read_trace_csv(trace);
  CHECK(rows.size() == 200);

  cli::cmd_analyze(cfg, "tracking", run.path, data.path, trace, out.path / "tracking.csv");
  cli::cmd_analyze(cfg, "contacts", run.path, data.path, trace, out.path / "contacts.csv");
  cli::cmd_analyze(cfg, "dtw", run.path, data.path, trace, out.path / "dtw.csv");
  cli::cmd_analyze(cfg, "clusters", run.path, data.path, trace, out.path / "clusters.csv");

  {
    std::ifstream is(out.path / "dtw.csv");
    std::string line;
    int lines = 0;
    while (std::getline(is, line)) {
      if (lines == 0) CHECK(line == "skill,trot_2Hz,pronk_2Hz");
      ++lines;
    }
    CHECK(lines == 3);  // header + 2 rows
  }

  CHECK_THROWS_AS(cli::cmd_analyze(cfg, "vibes", run.path, data.path, trace, out.path / "x.csv"),
                  ConfigError);
}

TEST_CASE("ablation flags are recorded in the resolved config") {
  TempDir data("camp_cli_data2");
  TempDir run("camp_cli_run2");
  ExperimentConfig cfg = tiny_experiment();
  cfg.trainer.iterations = 1;
  cfg.ablation.no_skill_reward = true;
  cli::cmd_generate_data(cfg, data.path, 3, false);
  cli::cmd_train(cfg, data.path, run.path, false, true);
  std::ifstream is(run.path / "resolved_config.json");
  const std::string text((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  CHECK(text.find("\"no_skill_reward\": true") != std::string::npos);
  CHECK(text.find("\"skill\": 0.0") != std::string::npos);  // recorded effective weight
}

TEST_CASE("dtw output is a symmetric matrix on the eight-skill store") {
  TempDir data("camp_cli_data3");
  TempDir run("camp_cli_run3");
  TempDir out("camp_cli_out3");
  ExperimentConfig cfg = tiny_experiment();
  cfg.dataset.gaits = {"trot", "pace", "bound", "pronk"};
  cfg.dataset.frequencies_hz = {2.0, 4.0};
  cfg.trainer.iterations = 1;
  cli::cmd_generate_data(cfg, data.path, 4, false);
  cli::cmd_train(cfg, data.path, run.path, false, true);
  cli::cmd_analyze(cfg, "dtw", run.path, data.path, "", out.path / "dtw.csv");
  std::ifstream is(out.path / "dtw.csv");
  std::string line;
  std::getline(is, line);  // header
  std::vector<std::vector<double>> dist;
  while (std::getline(is, line)) {
    std::stringstream ss(line);
    std::string cell;
    std::getline(ss, cell, ',');  // skill name
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    dist.push_back(row);
  }
  REQUIRE(dist.size() == 8);
  for (std::size_t i = 0; i < 8; ++i) {
    REQUIRE(dist[i].size() == 8);
    CHECK(dist[i][i] == 0.0);
    for (std::size_t j = 0; j < 8; ++j) {
      CHECK(dist[i][j] == doctest::Approx(dist[j][i]));
    }
  }
}

}  // TEST_SUITE
