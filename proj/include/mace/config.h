#ifndef MACE_CONFIG_H_
#define MACE_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "mace/layout.h"
#include "mace/posterior.h"
#include "mace/ppo.h"
#include "mace/rewards.h"

namespace mace {

enum class NoveltyBackend { kCount, kRnd };

std::string_view NoveltyBackendString(NoveltyBackend backend);
std::string_view PosteriorBackendString(PosteriorBackend backend);

// Everything a training run needs. Defaults are the GridWorld settings.
struct RunConfig {
  TaskName task = TaskName::kPass;
  int grid_size = 30;
  std::string layout_file;  // empty: procedural layout for grid_size
  int max_steps = kDefaultMaxSteps;

  RewardMode mode = RewardMode::kMace;
  double lambda = 0.01;
  double beta = 1.0;
  double gamma = 0.99;
  double gae_lambda = 0.95;
  int window = 10;
  int num_bins = 30;
  // Weight the hindsight log term by the raw accumulated novelty instead of
  // the relabeled one; the posterior is conditioned on the relabeled bin
  // either way.
  bool raw_z_weight = false;
  NoveltyBackend novelty = NoveltyBackend::kCount;
  PosteriorBackend posterior = PosteriorBackend::kTable;

  int num_envs = 16;
  int buffer_length = 300;
  int iterations = 300;
  std::vector<std::uint64_t> seeds = {0};
  std::string output_dir = "runs/default";

  PpoOptions ppo;

  bool decomposition_log = true;  // per-cell reward sums per iteration
  bool step_log = false;          // one row per agent-step
  bool bus_trace = false;         // t,agent,u audit trail
  int checkpoint_every = 0;       // 0: final checkpoint only
  int eval_episodes = 0;          // greedy episodes per env after training
};

// Throws ConfigError naming the offending key on any violation.
void ValidateConfig(const RunConfig& config);

// Unknown keys, wrong types and invalid values are ConfigErrors. Missing
// keys keep their defaults.
RunConfig ConfigFromJson(const nlohmann::json& doc);
nlohmann::json ConfigToJson(const RunConfig& config);

RunConfig LoadConfig(const std::filesystem::path& path);
RunConfig ParseConfig(const std::string& text);
// Pretty-printed JSON with every key present.
std::string SerializeConfig(const RunConfig& config);

}  // namespace mace

#endif  // MACE_CONFIG_H_
