#ifndef MACE_HEATMAP_H_
#define MACE_HEATMAP_H_

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "mace/layout.h"
#include "mace/trainer.h"

namespace mace {

enum class RewardComponent { kNov, kHin, kExt };

RewardComponent ParseRewardComponent(std::string_view text);
std::string_view RewardComponentString(RewardComponent c);

// Per-cell mean of one reward component for one agent over iterations
// [from, to). Cells the agent never acted from are absent.
struct Heatmap {
  int grid_size = 0;
  std::vector<double> mean;           // [y * grid + x]
  std::vector<std::int64_t> visits;   // 0 marks an absent cell

  bool present(int x, int y) const { return visits[y * grid_size + x] > 0; }
  double at(int x, int y) const { return mean[y * grid_size + x]; }
  // Cell with the largest mean among present cells (ties: row-major first).
  std::optional<Cell> Argmax() const;
};

// Throws ConfigError when the log is missing or malformed.
std::vector<CellStats> ReadDecompositionCsv(const std::filesystem::path& path);

Heatmap BuildHeatmap(const std::vector<CellStats>& rows, int grid_size,
                     int agent, RewardComponent component, int from, int to);

// x,y,visits,mean rows for present cells only.
void WriteHeatmapCsv(std::ostream& out, const Heatmap& map);
// One grid row per line, columns padded to equal width, "-" where absent.
std::string FormatHeatmapGrid(const Heatmap& map, int precision = 3);

}  // namespace mace

#endif  // MACE_HEATMAP_H_
