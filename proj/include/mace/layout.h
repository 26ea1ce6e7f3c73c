#ifndef MACE_LAYOUT_H_
#define MACE_LAYOUT_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace mace {

enum class TaskName { kPass, kSecretRoom, kMultiRoom };

std::string_view TaskNameString(TaskName task);
// Accepts "pass", "secret_room"/"secretroom", "multi_room"/"multiroom".
TaskName ParseTaskName(std::string_view text);

struct Cell {
  int x = 0;
  int y = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
};

enum class CellKind : std::uint8_t { kFloor, kWall, kDoor };

// Static geometry of a square grid. Coordinates are (x = column, y = row),
// y = 0 is the top row.
//
// Text legend (one character per cell, one row per line):
//   #      wall
//   .      floor
//   S      start cell (floor); agents take start cells in row-major order
//   T      target-room marker (floor); the target room is every cell
//          4-connected to a T without crossing walls or doors
//   1..9   switch k (floor)
//   A..I   door k (A is door 1); a door is passable only while open
// Lines starting with ';' are comments.
struct Layout {
  int size = 0;
  std::vector<CellKind> kinds;
  std::vector<int> switch_at;  // switch index or -1, per cell
  std::vector<int> door_at;    // door index or -1, per cell
  std::vector<std::vector<Cell>> switches;
  std::vector<std::vector<Cell>> doors;
  std::vector<Cell> starts;
  std::vector<std::uint8_t> target;  // target-room membership per cell
  std::vector<Cell> target_markers;  // 'T' cells as written

  int Index(int x, int y) const { return y * size + x; }
  bool InBounds(int x, int y) const {
    return x >= 0 && y >= 0 && x < size && y < size;
  }
  CellKind Kind(int x, int y) const { return kinds[Index(x, y)]; }
  bool IsTarget(int x, int y) const { return target[Index(x, y)] != 0; }
  int num_doors() const { return static_cast<int>(doors.size()); }
  int num_switches() const { return static_cast<int>(switches.size()); }
};

// Throws ConfigError on malformed maps (non-square, unknown characters,
// gaps in switch/door numbering, no target marker).
Layout ParseLayout(std::string_view text);
Layout LoadLayoutFile(const std::filesystem::path& path);
std::string FormatLayout(const Layout& layout);

// Procedural layout with the room/door/switch topology of each task,
// scaled to grid_size cells per side.
std::string GenerateLayoutText(TaskName task, int grid_size);

// Cells 4-connected to `seed` without crossing walls or doors.
std::vector<std::uint8_t> RoomMask(const Layout& layout, Cell seed);

}  // namespace mace

#endif  // MACE_LAYOUT_H_
