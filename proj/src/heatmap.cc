#include "mace/heatmap.h"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "mace/errors.h"

namespace mace {

RewardComponent ParseRewardComponent(std::string_view text) {
  if (text == "nov" || text == "r_nov") return RewardComponent::kNov;
  if (text == "hin" || text == "r_hin") return RewardComponent::kHin;
  if (text == "ext" || text == "r_ext") return RewardComponent::kExt;
  throw ConfigError("unknown reward component '" + std::string(text) +
                    "' (expected nov, hin or ext)");
}

std::string_view RewardComponentString(RewardComponent c) {
  switch (c) {
    case RewardComponent::kNov: return "nov";
    case RewardComponent::kHin: return "hin";
    case RewardComponent::kExt: return "ext";
  }
  return "unknown";
}

std::optional<Cell> Heatmap::Argmax() const {
  std::optional<Cell> best;
  double best_value = 0.0;
  for (int y = 0; y < grid_size; ++y) {
    for (int x = 0; x < grid_size; ++x) {
      if (!present(x, y)) continue;
      if (!best || at(x, y) > best_value) {
        best = Cell{x, y};
        best_value = at(x, y);
      }
    }
  }
  return best;
}

std::vector<CellStats> ReadDecompositionCsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("missing decomposition log " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("iteration,agent,x,y", 0) != 0) {
    throw ConfigError("malformed decomposition log " + path.string());
  }
  std::vector<CellStats> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    CellStats c;
    if (std::sscanf(line.c_str(), "%d,%d,%d,%d,%" SCNd64 ",%lf,%lf,%lf",
                    &c.iteration, &c.agent, &c.x, &c.y, &c.visits, &c.r_nov,
                    &c.r_hin, &c.r_ext) != 8) {
      throw ConfigError("malformed decomposition row: " + line);
    }
    rows.push_back(c);
  }
  return rows;
}

Heatmap BuildHeatmap(const std::vector<CellStats>& rows, int grid_size,
                     int agent, RewardComponent component, int from, int to) {
  if (grid_size < 1) throw UsageError("heatmap: grid size must be positive");
  Heatmap map;
  map.grid_size = grid_size;
  map.mean.assign(grid_size * grid_size, 0.0);
  map.visits.assign(grid_size * grid_size, 0);
  std::vector<double> sums(grid_size * grid_size, 0.0);
  for (const CellStats& c : rows) {
    if (c.agent != agent || c.iteration < from || c.iteration >= to) continue;
    if (c.x < 0 || c.y < 0 || c.x >= grid_size || c.y >= grid_size) {
      throw ConfigError("heatmap: cell outside the grid");
    }
    const int idx = c.y * grid_size + c.x;
    map.visits[idx] += c.visits;
    switch (component) {
      case RewardComponent::kNov: sums[idx] += c.r_nov; break;
      case RewardComponent::kHin: sums[idx] += c.r_hin; break;
      case RewardComponent::kExt: sums[idx] += c.r_ext; break;
    }
  }
  for (int i = 0; i < grid_size * grid_size; ++i) {
    if (map.visits[i] > 0) map.mean[i] = sums[i] / static_cast<double>(map.visits[i]);
  }
  return map;
}

void WriteHeatmapCsv(std::ostream& out, const Heatmap& map) {
  out << "x,y,visits,mean\n";
  char buf[40];
  for (int y = 0; y < map.grid_size; ++y) {
    for (int x = 0; x < map.grid_size; ++x) {
      if (!map.present(x, y)) continue;
      std::snprintf(buf, sizeof(buf), "%.17g", map.at(x, y));
      out << x << ',' << y << ',' << map.visits[y * map.grid_size + x] << ','
          << buf << '\n';
    }
  }
}

std::string FormatHeatmapGrid(const Heatmap& map, int precision) {
  std::vector<std::string> cells(map.mean.size());
  std::size_t width = 1;
  char buf[64];
  for (int y = 0; y < map.grid_size; ++y) {
    for (int x = 0; x < map.grid_size; ++x) {
      std::string& s = cells[y * map.grid_size + x];
      if (map.present(x, y)) {
        std::snprintf(buf, sizeof(buf), "%.*f", precision, map.at(x, y));
        s = buf;
      } else {
        s = "-";
      }
      width = std::max(width, s.size());
    }
  }
  std::ostringstream out;
  for (int y = 0; y < map.grid_size; ++y) {
    for (int x = 0; x < map.grid_size; ++x) {
      const std::string& s = cells[y * map.grid_size + x];
      if (x > 0) out << ' ';
      out << std::string(width - s.size(), ' ') << s;
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace mace
