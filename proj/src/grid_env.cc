#include "mace/grid_env.h"

#include <algorithm>
#include <string>
#include <utility>

#include "mace/errors.h"

namespace mace {

namespace {

struct TaskShape {
  int agents;
  int switches;
  int doors;
};

TaskShape ShapeOf(TaskName task) {
  switch (task) {
    case TaskName::kPass:
      return {2, 2, 1};
    case TaskName::kSecretRoom:
      return {2, 4, 3};
    case TaskName::kMultiRoom:
      return {3, 4, 5};
  }
  throw ConfigError("unknown task");
}

bool Blocking(const Layout& layout, int x, int y) {
  return !layout.InBounds(x, y) || layout.Kind(x, y) != CellKind::kFloor;
}

std::vector<std::uint8_t> OccupiedSwitches(const TaskSpec& spec,
                                           std::span<const Cell> positions) {
  const Layout& layout = spec.layout;
  std::vector<std::uint8_t> occupied(layout.num_switches(), 0);
  for (const Cell& p : positions) {
    const int k = layout.switch_at[layout.Index(p.x, p.y)];
    if (k >= 0) occupied[k] = 1;
  }
  return occupied;
}

}  // namespace

int RequiredAgents(TaskName task) { return ShapeOf(task).agents; }

TaskSpec MakeTaskSpec(TaskName task, int grid_size, int max_steps) {
  TaskSpec spec =
      MakeTaskSpec(task, ParseLayout(GenerateLayoutText(task, grid_size)),
                   max_steps);
  return spec;
}

TaskSpec MakeTaskSpec(TaskName task, Layout layout, int max_steps) {
  TaskSpec spec;
  spec.name = task;
  spec.grid_size = layout.size;
  spec.layout = std::move(layout);
  spec.max_steps = max_steps;
  spec.num_agents = RequiredAgents(task);
  ValidateTaskSpec(spec);
  return spec;
}

void ValidateTaskSpec(const TaskSpec& spec) {
  const Layout& layout = spec.layout;
  const TaskShape shape = ShapeOf(spec.name);
  const std::string task(TaskNameString(spec.name));
  if (layout.size != spec.grid_size) {
    throw ConfigError("grid_size does not match layout side");
  }
  if (spec.max_steps <= 0) throw ConfigError("max_steps must be positive");
  if (spec.num_agents != shape.agents) {
    throw ConfigError(task + " requires " + std::to_string(shape.agents) +
                      " agents");
  }
  if (static_cast<int>(layout.starts.size()) != spec.num_agents) {
    throw ConfigError(task + " layout must have one start cell per agent");
  }
  if (layout.num_switches() != shape.switches ||
      layout.num_doors() != shape.doors) {
    throw ConfigError(task + " layout needs " + std::to_string(shape.switches) +
                      " switches and " + std::to_string(shape.doors) +
                      " doors");
  }
  for (const auto& door : layout.doors) {
    for (const Cell& c : door) {
      const bool horizontal_segment = Blocking(layout, c.x - 1, c.y) &&
                                      Blocking(layout, c.x + 1, c.y) &&
                                      layout.InBounds(c.x - 1, c.y) &&
                                      layout.InBounds(c.x + 1, c.y);
      const bool vertical_segment = Blocking(layout, c.x, c.y - 1) &&
                                    Blocking(layout, c.x, c.y + 1) &&
                                    layout.InBounds(c.x, c.y - 1) &&
                                    layout.InBounds(c.x, c.y + 1);
      if (!horizontal_segment && !vertical_segment) {
        throw ConfigError("door at (" + std::to_string(c.x) + "," +
                          std::to_string(c.y) + ") is not on a wall segment");
      }
    }
  }
  for (const Cell& s : layout.starts) {
    if (layout.switch_at[layout.Index(s.x, s.y)] >= 0 ||
        layout.IsTarget(s.x, s.y)) {
      throw ConfigError("start cells must be plain floor outside the target");
    }
  }
  for (int i = 0; i < layout.size * layout.size; ++i) {
    if (layout.target[i] && layout.kinds[i] != CellKind::kFloor) {
      throw ConfigError("target room overlaps a wall or door");
    }
  }
}

std::int64_t LocalObservation::Key(int grid_size) const {
  std::int64_t bits = 0;
  for (std::size_t d = 0; d < door_flags.size(); ++d) {
    if (door_flags[d]) bits |= std::int64_t{1} << d;
  }
  return (bits * grid_size + y) * grid_size + x;
}

void LocalObservation::Features(int grid_size, std::span<double> out) const {
  const double scale = grid_size > 1 ? 1.0 / (grid_size - 1) : 1.0;
  out[0] = x * scale;
  out[1] = y * scale;
  for (std::size_t d = 0; d < door_flags.size(); ++d) {
    out[2 + d] = door_flags[d] ? 1.0 : 0.0;
  }
}

std::int64_t NumObservationKeys(const TaskSpec& spec) {
  return (std::int64_t{1} << spec.num_doors()) * spec.grid_size *
         spec.grid_size;
}

std::vector<std::uint8_t> EvaluateDoors(const TaskSpec& spec,
                                        std::span<const Cell> positions) {
  const std::vector<std::uint8_t> s = OccupiedSwitches(spec, positions);
  std::vector<std::uint8_t> open(spec.num_doors(), 0);
  switch (spec.name) {
    case TaskName::kPass:
      open[0] = std::any_of(s.begin(), s.end(), [](auto v) { return v; });
      break;
    case TaskName::kSecretRoom:
      for (int k = 0; k < spec.num_doors(); ++k) open[k] = s[0] || s[k + 1];
      break;
    case TaskName::kMultiRoom:
      open[0] = s[0];
      open[2] = s[1];
      open[1] = s[3];
      open[3] = s[2];
      open[4] = s[2];
      break;
  }
  return open;
}

std::vector<LocalObservation> Observe(const TaskSpec& spec,
                                      const JointState& state) {
  std::vector<LocalObservation> obs(spec.num_agents);
  for (int i = 0; i < spec.num_agents; ++i) {
    obs[i].x = state.positions[i].x;
    obs[i].y = state.positions[i].y;
    obs[i].door_flags = state.door_open;
  }
  return obs;
}

JointState ResetState(const TaskSpec& spec, std::uint64_t /*seed*/) {
  JointState state;
  state.positions = spec.layout.starts;
  state.door_open = EvaluateDoors(spec, state.positions);
  state.steps_elapsed = 0;
  state.done = false;
  return state;
}

bool AllInTarget(const TaskSpec& spec, std::span<const Cell> positions) {
  return std::all_of(positions.begin(), positions.end(), [&](const Cell& p) {
    return spec.layout.IsTarget(p.x, p.y);
  });
}

StepResult Step(const TaskSpec& spec, const JointState& state,
                std::span<const Action> actions) {
  if (state.done) throw UsageError("step called on a finished episode");
  if (static_cast<int>(actions.size()) != spec.num_agents) {
    throw UsageError("step expects one action per agent");
  }
  const Layout& layout = spec.layout;
  StepResult result;
  result.state = state;
  JointState& next = result.state;
  for (int i = 0; i < spec.num_agents; ++i) {
    Cell p = state.positions[i];
    int nx = p.x;
    int ny = p.y;
    switch (actions[i]) {
      case Action::kUp:
        --ny;
        break;
      case Action::kDown:
        ++ny;
        break;
      case Action::kLeft:
        --nx;
        break;
      case Action::kRight:
        ++nx;
        break;
    }
    if (!layout.InBounds(nx, ny)) continue;
    const int idx = layout.Index(nx, ny);
    const CellKind kind = layout.kinds[idx];
    if (kind == CellKind::kWall) continue;
    if (kind == CellKind::kDoor && !state.door_open[layout.door_at[idx]]) {
      continue;
    }
    next.positions[i] = {nx, ny};
  }
  next.door_open = EvaluateDoors(spec, next.positions);
  next.steps_elapsed = state.steps_elapsed + 1;
  result.success = AllInTarget(spec, next.positions);
  result.reward = result.success ? kSuccessReward : 0.0;
  next.done = result.success || next.steps_elapsed >= spec.max_steps;
  result.done = next.done;
  result.observations = Observe(spec, next);
  return result;
}

GridEnv::GridEnv(TaskSpec spec) : spec_(std::move(spec)) {
  ValidateTaskSpec(spec_);
  Reset();
}

const std::vector<LocalObservation>& GridEnv::Reset(std::uint64_t seed) {
  state_ = ResetState(spec_, seed);
  observations_ = Observe(spec_, state_);
  return observations_;
}

const StepResult& GridEnv::Step(std::span<const Action> actions) {
  last_ = mace::Step(spec_, state_, actions);
  state_ = last_.state;
  observations_ = last_.observations;
  return last_;
}

}  // namespace mace
