#pragma once

#include "camp/config.hpp"

#include <filesystem>
#include <optional>
#include <string>

namespace camp::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitNumeric = 4;

// generate-data: writes one clip file per skill plus manifest.json.
void cmd_generate_data(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
                       std::uint64_t seed, bool force);

// train: loads the clip store, trains, writes metrics + checkpoints.
void cmd_train(const ExperimentConfig& cfg, const std::filesystem::path& data_dir,
               const std::filesystem::path& out_dir, bool resume, bool quiet = false);

// rollout: runs the checkpointed policy under a skill schedule, writes a trace CSV.
void cmd_rollout(const ExperimentConfig& cfg, const std::filesystem::path& run_dir,
                 const std::filesystem::path& schedule_path, const std::filesystem::path& out_trace,
                 std::uint64_t seed);

// analyze: dtw | clusters | contacts | tracking.
void cmd_analyze(const ExperimentConfig& cfg, const std::string& kind,
                 const std::filesystem::path& run_dir, const std::filesystem::path& data_dir,
                 const std::filesystem::path& input_trace, const std::filesystem::path& out_path);

// ablate: five training runs sharing seeds, then the comparison table.
// Returns false when any row is missing.
bool cmd_ablate(const ExperimentConfig& cfg, const std::filesystem::path& data_dir,
                const std::filesystem::path& out_dir, bool quiet = false);

// Loads clips + catalog recorded by cmd_generate_data.
struct LoadedDataset {
  std::vector<Skill> catalog;
  std::vector<MotionClip> clips;
  std::uint64_t seed = 0;
};
LoadedDataset load_dataset(const std::filesystem::path& data_dir);

int run(int argc, char** argv);

}  // namespace camp::cli
