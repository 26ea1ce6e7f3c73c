#ifndef MACE_HARNESS_H_
#define MACE_HARNESS_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "mace/config.h"
#include "mace/trainer.h"

namespace mace {

// Relative output directories are placed under $MACE_OUTPUT_ROOT when that
// variable is set and non-empty.
std::filesystem::path ResolveOutputDir(const std::string& output_dir);

void WriteCurveCsv(const std::filesystem::path& path,
                   const std::vector<IterationRecord>& curve);
std::vector<IterationRecord> ReadCurveCsv(const std::filesystem::path& path);

inline constexpr std::array<const char*, 4> kCurveMetrics = {
    "mean_episode_reward", "mean_r_nov", "mean_r_hin", "success_rate"};

struct AggregateRow {
  int iteration = 0;
  std::int64_t env_steps = 0;
  int num_seeds = 0;
  std::array<double, 4> mean{};  // ordered as kCurveMetrics
  std::array<double, 4> stderr_{};  // sample std / sqrt(n); 0 for one seed
};

// Row-wise mean and standard error across seeds. Rows are aligned by
// position; only iterations present in every curve are aggregated.
std::vector<AggregateRow> Aggregate(
    const std::vector<std::vector<IterationRecord>>& curves);
void WriteAggregateCsv(const std::filesystem::path& path,
                       const std::vector<AggregateRow>& rows);

struct SeedResult {
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  std::filesystem::path dir;
  std::vector<IterationRecord> curve;
  std::int64_t env_steps = 0;
  std::int64_t bus_scalars = 0;
  int num_agents = 0;
  EvalResult eval;
};

struct RunResult {
  std::filesystem::path dir;
  std::vector<SeedResult> seeds;
  std::vector<AggregateRow> aggregate;
};

// Trains every seed in config.seeds. Layout of the output directory:
//   config.json                  the resolved configuration
//   aggregate.csv                mean and standard error across seeds
//   seed_<s>/curve.csv           per-iteration learning curve
//   seed_<s>/decomposition.csv   per-cell reward sums (when enabled)
//   seed_<s>/agent<i>_{policy,value}.bin   checkpoints
// A seed that fails (I/O or numerical error) is reported in its
// SeedResult and left out of the aggregate; other seeds still run.
RunResult Run(const RunConfig& config, std::ostream* progress = nullptr);

enum class AblationAxis { kMode, kLambda, kWindow, kSumVsMax };

AblationAxis ParseAblationAxis(std::string_view text);
std::string_view AblationAxisString(AblationAxis axis);

struct Variant {
  std::string name;
  RunConfig config;
};

// mode: loc, nov_sum, hin, mace; lambda: 0.1, 0.01, 0.001;
// window: 1, 10, 50; sum_vs_max: nov_sum, nov_max. Each variant writes to
// <output_dir>/<axis>/<name>.
std::vector<Variant> AblationVariants(const RunConfig& base, AblationAxis axis);

struct AblationResult {
  std::filesystem::path report;  // joined CSV keyed by variant
  std::vector<std::pair<std::string, RunResult>> runs;
};

AblationResult Ablate(const RunConfig& base, AblationAxis axis,
                      std::ostream* progress = nullptr);

}  // namespace mace

#endif  // MACE_HARNESS_H_
