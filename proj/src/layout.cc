#include "mace/layout.h"

#include <algorithm>
#include <cctype>
#include <deque>
#include <fstream>
#include <sstream>

#include "mace/errors.h"

namespace mace {

std::string_view TaskNameString(TaskName task) {
  switch (task) {
    case TaskName::kPass:
      return "pass";
    case TaskName::kSecretRoom:
      return "secret_room";
    case TaskName::kMultiRoom:
      return "multi_room";
  }
  return "unknown";
}

TaskName ParseTaskName(std::string_view text) {
  std::string lower;
  for (char c : text) {
    if (c != '_' && c != '-') lower.push_back(std::tolower(c));
  }
  if (lower == "pass") return TaskName::kPass;
  if (lower == "secretroom") return TaskName::kSecretRoom;
  if (lower == "multiroom") return TaskName::kMultiRoom;
  throw ConfigError("unknown task '" + std::string(text) + "'");
}

namespace {

std::vector<std::string> SplitRows(std::string_view text) {
  std::vector<std::string> rows;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) {
      line.pop_back();
    }
    if (line.empty() || line.front() == ';') continue;
    rows.push_back(line);
  }
  return rows;
}

// Grows a vector of cell groups so that index k exists.
void AddToGroup(std::vector<std::vector<Cell>>& groups, int k, Cell c) {
  if (static_cast<int>(groups.size()) <= k) groups.resize(k + 1);
  groups[k].push_back(c);
}

}  // namespace

Layout ParseLayout(std::string_view text) {
  std::vector<std::string> rows = SplitRows(text);
  const int n = static_cast<int>(rows.size());
  if (n == 0) throw ConfigError("layout: empty map");

  Layout layout;
  layout.size = n;
  layout.kinds.assign(n * n, CellKind::kFloor);
  layout.switch_at.assign(n * n, -1);
  layout.door_at.assign(n * n, -1);
  layout.target.assign(n * n, 0);
  for (int y = 0; y < n; ++y) {
    if (static_cast<int>(rows[y].size()) != n) {
      throw ConfigError("layout: row " + std::to_string(y) + " has " +
                        std::to_string(rows[y].size()) +
                        " cells, expected a square map of side " +
                        std::to_string(n));
    }
    for (int x = 0; x < n; ++x) {
      const char c = rows[y][x];
      const int idx = layout.Index(x, y);
      const Cell cell{x, y};
      if (c == '#') {
        layout.kinds[idx] = CellKind::kWall;
      } else if (c == '.') {
      } else if (c == 'S') {
        layout.starts.push_back(cell);
      } else if (c == 'T') {
        layout.target_markers.push_back(cell);
      } else if (c >= '1' && c <= '9') {
        layout.switch_at[idx] = c - '1';
        AddToGroup(layout.switches, c - '1', cell);
      } else if (c >= 'A' && c <= 'I') {
        layout.kinds[idx] = CellKind::kDoor;
        layout.door_at[idx] = c - 'A';
        AddToGroup(layout.doors, c - 'A', cell);
      } else {
        throw ConfigError(std::string("layout: unknown cell character '") +
                          c + "'");
      }
    }
  }

  for (std::size_t k = 0; k < layout.switches.size(); ++k) {
    if (layout.switches[k].empty()) {
      throw ConfigError("layout: switch " + std::to_string(k + 1) +
                        " missing (switch numbering has a gap)");
    }
  }
  for (std::size_t k = 0; k < layout.doors.size(); ++k) {
    if (layout.doors[k].empty()) {
      throw ConfigError("layout: door " + std::to_string(k + 1) +
                        " missing (door numbering has a gap)");
    }
  }
  if (layout.target_markers.empty()) throw ConfigError("layout: no target marker 'T'");

  for (const Cell& seed : layout.target_markers) {
    std::vector<std::uint8_t> room = RoomMask(layout, seed);
    for (int i = 0; i < n * n; ++i) layout.target[i] |= room[i];
  }
  return layout;
}

Layout LoadLayoutFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("layout: cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ParseLayout(buffer.str());
}

std::string FormatLayout(const Layout& layout) {
  std::string out;
  const bool explicit_markers = !layout.target_markers.empty();
  bool target_marked = false;
  const auto is_start = [&](int x, int y) {
    return std::find(layout.starts.begin(), layout.starts.end(),
                     Cell{x, y}) != layout.starts.end();
  };
  for (int y = 0; y < layout.size; ++y) {
    for (int x = 0; x < layout.size; ++x) {
      const int idx = layout.Index(x, y);
      char c = '.';
      if (layout.kinds[idx] == CellKind::kWall) {
        c = '#';
      } else if (layout.kinds[idx] == CellKind::kDoor) {
        c = static_cast<char>('A' + layout.door_at[idx]);
      } else if (layout.switch_at[idx] >= 0) {
        c = static_cast<char>('1' + layout.switch_at[idx]);
      } else if (is_start(x, y)) {
        c = 'S';
      } else if (explicit_markers
                     ? std::find(layout.target_markers.begin(),
                                 layout.target_markers.end(),
                                 Cell{x, y}) != layout.target_markers.end()
                     : layout.target[idx] && !target_marked) {
        c = 'T';
        target_marked = true;
      }
      out.push_back(c);
    }
    out.push_back('\n');
  }
  return out;
}

namespace {

class Canvas {
 public:
  explicit Canvas(int size) : size_(size), rows_(size, std::string(size, '.')) {}
  void Set(int x, int y, char c) { rows_.at(y).at(x) = c; }
  void VerticalWall(int x, int y0, int y1) {
    for (int y = y0; y <= y1; ++y) Set(x, y, '#');
  }
  void HorizontalWall(int y, int x0, int x1) {
    for (int x = x0; x <= x1; ++x) Set(x, y, '#');
  }
  std::string Text() const {
    std::string out;
    for (const std::string& r : rows_) out += r + "\n";
    return out;
  }

 private:
  int size_;
  std::vector<std::string> rows_;
};

}  // namespace

std::string GenerateLayoutText(TaskName task, int grid_size) {
  const int g = grid_size;
  const int mid = g / 2;
  switch (task) {
    case TaskName::kPass: {
      // Two rooms split by a vertical wall with one door; the right room
      // is the target. Switch 1 sits on the bottom edge of the left room,
      // switch 2 on the top edge of the right room.
      if (g < 9) throw ConfigError("pass layout needs grid_size >= 9");
      Canvas c(g);
      c.VerticalWall(mid, 0, g - 1);
      c.Set(mid, mid, 'A');
      c.Set(1, 1, 'S');
      c.Set(2, 1, 'S');
      c.Set(mid / 2, g - 1, '1');
      c.Set(g - 1 - (g - mid - 1) / 2, 0, '2');
      c.Set(g - 1, g - 1, 'T');
      return c.Text();
    }
    case TaskName::kSecretRoom: {
      // Left room plus three stacked rooms on the right, each behind its own
      // door. Switch k+1 sits at the far wall of right room k; the bottom
      // right room is the target.
      if (g < 12) throw ConfigError("secret_room layout needs grid_size >= 12");
      Canvas c(g);
      const int h1 = g / 3;
      const int h2 = 2 * g / 3;
      c.VerticalWall(mid, 0, g - 1);
      c.HorizontalWall(h1, mid + 1, g - 1);
      c.HorizontalWall(h2, mid + 1, g - 1);
      const int centers[3] = {(h1 - 1) / 2, (h1 + 1 + h2 - 1) / 2,
                              (h2 + 1 + g - 1) / 2};
      for (int k = 0; k < 3; ++k) {
        c.Set(mid, centers[k], static_cast<char>('A' + k));
        c.Set(g - 1, centers[k], static_cast<char>('2' + k));
      }
      c.Set(1, 1, 'S');
      c.Set(2, 1, 'S');
      c.Set(mid / 2, g - 1, '1');
      c.Set(g - 2, g - 1, 'T');
      return c.Text();
    }
    case TaskName::kMultiRoom: {
      // Four quadrants: start room (top left), switch-2 room (bottom left),
      // switch-4 room (bottom right) and the target room (top right).
      //   door 1: start -> bottom left       (switch 1)
      //   door 3: bottom left -> bottom right (switch 2)
      //   door 2: bottom right -> target      (switch 4)
      //   door 4: bottom right -> target      (switch 3)
      //   door 5: start -> target             (switch 3)
      if (g < 12) throw ConfigError("multi_room layout needs grid_size >= 12");
      Canvas c(g);
      c.VerticalWall(mid, 0, g - 1);
      c.HorizontalWall(mid, 0, g - 1);
      const int right = g - mid - 1;
      c.Set(mid / 2, mid, 'A');
      c.Set(mid + 1 + right / 3, mid, 'B');
      c.Set(mid, mid + 1 + right / 2, 'C');
      c.Set(std::min(mid + 2 + 2 * right / 3, g - 2), mid, 'D');
      c.Set(mid, mid / 2, 'E');
      c.Set(1, 1, 'S');
      c.Set(2, 1, 'S');
      c.Set(3, 1, 'S');
      c.Set(1, mid - 1, '1');
      c.Set(1, g - 1, '2');
      c.Set(g - 1, 0, '3');
      c.Set(g - 1, g - 1, '4');
      c.Set(g - 2, 1, 'T');
      return c.Text();
    }
  }
  throw ConfigError("unknown task");
}

std::vector<std::uint8_t> RoomMask(const Layout& layout, Cell seed) {
  const int n = layout.size;
  std::vector<std::uint8_t> mask(n * n, 0);
  if (!layout.InBounds(seed.x, seed.y) ||
      layout.Kind(seed.x, seed.y) != CellKind::kFloor) {
    return mask;
  }
  std::deque<Cell> frontier{seed};
  mask[layout.Index(seed.x, seed.y)] = 1;
  constexpr int kDx[4] = {0, 0, -1, 1};
  constexpr int kDy[4] = {-1, 1, 0, 0};
  while (!frontier.empty()) {
    const Cell c = frontier.front();
    frontier.pop_front();
    for (int d = 0; d < 4; ++d) {
      const int nx = c.x + kDx[d];
      const int ny = c.y + kDy[d];
      if (!layout.InBounds(nx, ny)) continue;
      const int idx = layout.Index(nx, ny);
      if (mask[idx] || layout.kinds[idx] != CellKind::kFloor) continue;
      mask[idx] = 1;
      frontier.push_back({nx, ny});
    }
  }
  return mask;
}

}  // namespace mace
