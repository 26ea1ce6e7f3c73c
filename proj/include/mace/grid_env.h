#ifndef MACE_GRID_ENV_H_
#define MACE_GRID_ENV_H_

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "mace/layout.h"

namespace mace {

enum class Action : std::uint8_t { kUp = 0, kDown = 1, kLeft = 2, kRight = 3 };
inline constexpr int kNumActions = 4;

inline constexpr double kSuccessReward = 100.0;
inline constexpr int kDefaultMaxSteps = 300;

struct TaskSpec {
  TaskName name = TaskName::kPass;
  int grid_size = 30;
  Layout layout;
  int max_steps = kDefaultMaxSteps;
  int num_agents = 2;

  int num_doors() const { return layout.num_doors(); }
  int observation_dim() const { return 2 + num_doors(); }
};

int RequiredAgents(TaskName task);

// Builds a spec from the procedural layout for `grid_size`.
TaskSpec MakeTaskSpec(TaskName task, int grid_size,
                      int max_steps = kDefaultMaxSteps);
// Builds a spec around an explicit layout (e.g. loaded from a file).
TaskSpec MakeTaskSpec(TaskName task, Layout layout,
                      int max_steps = kDefaultMaxSteps);

// Throws ConfigError unless: doors sit on wall segments, switches and
// starts are floor cells outside the target room, the switch/door counts
// match the task's rules, and there is one start cell per agent.
void ValidateTaskSpec(const TaskSpec& spec);

struct LocalObservation {
  int x = 0;
  int y = 0;
  std::vector<std::uint8_t> door_flags;

  int dim() const { return 2 + static_cast<int>(door_flags.size()); }
  // Dense key over (x, y, door bits) in [0, grid^2 * 2^doors).
  std::int64_t Key(int grid_size) const;
  // Network input: coordinates scaled to [0, 1] followed by door flags.
  void Features(int grid_size, std::span<double> out) const;
};

std::int64_t NumObservationKeys(const TaskSpec& spec);

struct JointState {
  std::vector<Cell> positions;
  std::vector<std::uint8_t> door_open;
  int steps_elapsed = 0;
  bool done = false;
};

struct StepResult {
  JointState state;
  std::vector<LocalObservation> observations;
  double reward = 0.0;  // per-agent extrinsic reward
  bool done = false;
  bool success = false;
};

// Door flags as a pure function of agent positions:
//   Pass:       any occupied switch opens door 1
//   SecretRoom: switch k+1 opens door k; switch 1 opens every door
//   MultiRoom:  s1 -> d1, s2 -> d3, s4 -> d2, s3 -> {d4, d5}
std::vector<std::uint8_t> EvaluateDoors(const TaskSpec& spec,
                                        std::span<const Cell> positions);

std::vector<LocalObservation> Observe(const TaskSpec& spec,
                                      const JointState& state);

// Fixed start cells, doors evaluated from them. `seed` is accepted for API
// symmetry; transitions are deterministic.
JointState ResetState(const TaskSpec& spec, std::uint64_t seed = 0);

// All agents move simultaneously against the current door state; a move
// into a wall, closed door or the boundary leaves the agent in place. Doors
// are re-evaluated after the move. Throws UsageError after `done`.
StepResult Step(const TaskSpec& spec, const JointState& state,
                std::span<const Action> actions);

bool AllInTarget(const TaskSpec& spec, std::span<const Cell> positions);

// Stateful convenience wrapper owning one episode at a time.
class GridEnv {
 public:
  explicit GridEnv(TaskSpec spec);

  const std::vector<LocalObservation>& Reset(std::uint64_t seed = 0);
  const StepResult& Step(std::span<const Action> actions);

  const TaskSpec& spec() const { return spec_; }
  const JointState& state() const { return state_; }
  const std::vector<LocalObservation>& observations() const {
    return observations_;
  }

 private:
  TaskSpec spec_;
  JointState state_;
  std::vector<LocalObservation> observations_;
  StepResult last_;
};

}  // namespace mace

#endif  // MACE_GRID_ENV_H_
