#include <gtest/gtest.h>

#include <random>

#include "mace/errors.h"
#include "mace/grid_env.h"
#include "mace/rng.h"

namespace mace {
namespace {

Cell SwitchCell(const TaskSpec& spec, int k) { return spec.layout.switches[k][0]; }
Cell DoorCell(const TaskSpec& spec, int k) { return spec.layout.doors[k][0]; }

JointState StateAt(const TaskSpec& spec, std::vector<Cell> positions) {
  JointState s;
  s.door_open = EvaluateDoors(spec, positions);
  s.positions = std::move(positions);
  return s;
}

TEST(GridEnvTest, ObservationDimensionsPerTask) {
  EXPECT_EQ(MakeTaskSpec(TaskName::kPass, 15).observation_dim(), 3);
  EXPECT_EQ(MakeTaskSpec(TaskName::kSecretRoom, 15).observation_dim(), 5);
  EXPECT_EQ(MakeTaskSpec(TaskName::kMultiRoom, 15).observation_dim(), 7);
}

TEST(GridEnvTest, ResetPlacesAgentsInLeftRoomWithDoorsClosed) {
  const TaskSpec spec = MakeTaskSpec(TaskName::kPass, 30);
  GridEnv env(spec);
  const auto& obs = env.Reset(0);
  ASSERT_EQ(obs.size(), 2u);
  const int wall_x = DoorCell(spec, 0).x;
  for (const LocalObservation& o : obs) {
    EXPECT_LT(o.x, wall_x);
    for (auto f : o.door_flags) EXPECT_EQ(f, 0);
  }
  EXPECT_EQ(env.state().steps_elapsed, 0);
}

TEST(GridEnvTest, ResetIsDeterministic) {
  const TaskSpec spec = MakeTaskSpec(TaskName::kPass, 15);
  const JointState a = ResetState(spec, 0);
  const JointState b = ResetState(spec, 0);
  EXPECT_EQ(a.positions, b.positions);
  EXPECT_EQ(a.door_open, b.door_open);
}

TEST(GridEnvTest, MultiRoomResetObservationLengthSeven) {
  GridEnv env(MakeTaskSpec(TaskName::kMultiRoom, 30));
  const auto& obs = env.Reset(7);
  ASSERT_EQ(obs.size(), 3u);
  for (const LocalObservation& o : obs) EXPECT_EQ(o.dim(), 7);
}

TEST(GridEnvTest, PassAnySwitchOpensDoor) {
  const TaskSpec spec = MakeTaskSpec(TaskName::kPass, 15);
  const std::vector<Cell> on_s2 = {SwitchCell(spec, 1), spec.layout.starts[1]};
  EXPECT_EQ(EvaluateDoors(spec, on_s2), std::vector<std::uint8_t>({1}));
  const std::vector<Cell> on_s1 = {spec.layout.starts[0], SwitchCell(spec, 0)};
  EXPECT_EQ(EvaluateDoors(spec, on_s1), std::vector<std::uint8_t>({1}));
}

TEST(GridEnvTest, NoAgentOnSwitchClosesEveryDoor) {
  for (TaskName t : {TaskName::kPass, TaskName::kSecretRoom, TaskName::kMultiRoom}) {
    const TaskSpec spec = MakeTaskSpec(t, 15);
    const auto flags = EvaluateDoors(spec, spec.layout.starts);
    for (auto f : flags) EXPECT_EQ(f, 0);
  }
}

TEST(GridEnvTest, MultiRoomSwitchRules) {
  const TaskSpec spec = MakeTaskSpec(TaskName::kMultiRoom, 15);
  const Cell rest = spec.layout.starts[0];
  auto doors_for = [&](int sw) {
    return EvaluateDoors(spec, std::vector<Cell>{SwitchCell(spec, sw), rest, rest});
  };
  EXPECT_EQ(doors_for(0), std::vector<std::uint8_t>({1, 0, 0, 0, 0}));
  EXPECT_EQ(doors_for(1), std::vector<std::uint8_t>({0, 0, 1, 0, 0}));
  EXPECT_EQ(doors_for(2), std::vector<std::uint8_t>({0, 0, 0, 1, 1}));
  EXPECT_EQ(doors_for(3), std::vector<std::uint8_t>({0, 1, 0, 0, 0}));
}

TEST(GridEnvTest, SecretRoomSwitchRules) {
  const TaskSpec spec = MakeTaskSpec(TaskName::kSecretRoom, 15);
  const Cell rest = spec.layout.starts[0];
  auto doors_for = [&](int sw) {
    return EvaluateDoors(spec, std::vector<Cell>{SwitchCell(spec, sw), rest});
  };
  EXPECT_EQ(doors_for(0), std::vector<std::uint8_t>({1, 1, 1}));
  EXPECT_EQ(doors_for(1), std::vector<std::uint8_t>({1, 0, 0}));
  EXPECT_EQ(doors_for(2), std::vector<std::uint8_t>({0, 1, 0}));
  EXPECT_EQ(doors_for(3), std::vector<std::uint8_t>({0, 0, 1}));
}

TEST(GridEnvTest, ClosedDoorBlocksMove) {
  const TaskSpec spec = MakeTaskSpec(TaskName::kPass, 15);
  const Cell door = DoorCell(spec, 0);
  const Cell before{door.x - 1, door.y};
  const JointState s = StateAt(spec, {before, spec.layout.starts[1]});
  const Action acts[] = {Action::kRight, Action::kUp};
  const StepResult r = Step(spec, s, acts);
  EXPECT_EQ(r.state.positions[0], before);
  EXPECT_FALSE(r.done);
  EXPECT_EQ(r.reward, 0.0);
}

TEST(GridEnvTest, OpenDoorIsPassable) {
  const TaskSpec spec = MakeTaskSpec(TaskName::kPass, 15);
  const Cell door = DoorCell(spec, 0);
  const Cell before{door.x - 1, door.y};
  const JointState s = StateAt(spec, {before, SwitchCell(spec, 0)});
  ASSERT_EQ(s.door_open[0], 1);
  const Action acts[] = {Action::kRight, Action::kUp};
  // Agent 1 leaves the switch on the same step, so the door is closed again
  // afterwards, but the move was made against the open door.
  const StepResult r = Step(spec, s, acts);
  EXPECT_EQ(r.state.positions[0], door);
  EXPECT_EQ(r.state.door_open[0], 0);
}

TEST(GridEnvTest, BoundaryAndWallBlockMoves) {
  const TaskSpec spec = MakeTaskSpec(TaskName::kPass, 15);
  const JointState s = StateAt(spec, {Cell{0, 0}, Cell{6, 3}});
  const Action acts[] = {Action::kUp, Action::kRight};
  const StepResult r = Step(spec, s, acts);
  EXPECT_EQ(r.state.positions[0], (Cell{0, 0}));
  EXPECT_EQ(r.state.positions[1], (Cell{6, 3}));
}

TEST(GridEnvTest, AllAgentsInTargetEndsWithReward) {
  const TaskSpec spec = MakeTaskSpec(TaskName::kPass, 15);
  const Cell a{13, 13};
  const Cell b{12, 13};
  ASSERT_TRUE(spec.layout.IsTarget(13, 14));
  const JointState s = StateAt(spec, {a, b});
  const Action acts[] = {Action::kDown, Action::kDown};
  const StepResult r = Step(spec, s, acts);
  EXPECT_TRUE(r.done);
  EXPECT_TRUE(r.success);
  EXPECT_EQ(r.reward, 100.0);
}

TEST(GridEnvTest, TimeLimitEndsWithoutReward) {
  const TaskSpec spec = MakeTaskSpec(TaskName::kPass, 15);
  GridEnv env(spec);
  env.Reset(0);
  const Action acts[] = {Action::kUp, Action::kLeft};
  for (int t = 0; t < 299; ++t) {
    const StepResult& r = env.Step(acts);
    ASSERT_FALSE(r.done);
    ASSERT_EQ(r.reward, 0.0);
  }
  const StepResult& last = env.Step(acts);
  EXPECT_TRUE(last.done);
  EXPECT_FALSE(last.success);
  EXPECT_EQ(last.reward, 0.0);
  EXPECT_EQ(last.state.steps_elapsed, 300);
}

TEST(GridEnvTest, StepAfterDoneThrows) {
  const TaskSpec spec = MakeTaskSpec(TaskName::kPass, 15, 1);
  GridEnv env(spec);
  env.Reset(0);
  const Action acts[] = {Action::kUp, Action::kUp};
  env.Step(acts);
  EXPECT_THROW(env.Step(acts), UsageError);
}

TEST(GridEnvTest, WrongActionCountThrows) {
  GridEnv env(MakeTaskSpec(TaskName::kPass, 15));
  const Action acts[] = {Action::kUp};
  EXPECT_THROW(env.Step(acts), UsageError);
}

TEST(GridEnvTest, AgentsMayShareACell) {
  const TaskSpec spec = MakeTaskSpec(TaskName::kPass, 15);
  const JointState s = StateAt(spec, {Cell{2, 2}, Cell{4, 2}});
  const Action acts[] = {Action::kRight, Action::kLeft};
  const StepResult r = Step(spec, s, acts);
  EXPECT_EQ(r.state.positions[0], (Cell{3, 2}));
  EXPECT_EQ(r.state.positions[1], (Cell{3, 2}));
}

// Random walks: doors always equal a fresh evaluation from positions,
// agents stay on in-bounds non-wall cells, and episodes never exceed the cap.
TEST(GridEnvPropertyTest, RandomWalkInvariants) {
  for (TaskName t : {TaskName::kPass, TaskName::kSecretRoom, TaskName::kMultiRoom}) {
    const TaskSpec spec = MakeTaskSpec(t, 15, 120);
    GridEnv env(spec);
    Rng rng(DeriveSeed(11, {static_cast<std::uint64_t>(t)}));
    std::uniform_int_distribution<int> pick(0, kNumActions - 1);
    std::vector<Action> acts(spec.num_agents);
    for (int episode = 0; episode < 20; ++episode) {
      env.Reset(episode);
      int steps = 0;
      while (true) {
        for (Action& a : acts) a = static_cast<Action>(pick(rng));
        const StepResult& r = env.Step(acts);
        ++steps;
        EXPECT_EQ(r.state.door_open, EvaluateDoors(spec, r.state.positions));
        for (const Cell& c : r.state.positions) {
          ASSERT_TRUE(spec.layout.InBounds(c.x, c.y));
          EXPECT_NE(spec.layout.Kind(c.x, c.y), CellKind::kWall);
        }
        if (r.done) break;
      }
      EXPECT_LE(steps, spec.max_steps);
    }
  }
}

TEST(GridEnvTest, ObservationKeysAreDistinctAndDense) {
  const TaskSpec spec = MakeTaskSpec(TaskName::kSecretRoom, 12);
  std::vector<int> seen(NumObservationKeys(spec), 0);
  for (int bits = 0; bits < 8; ++bits) {
    for (int y = 0; y < 12; ++y) {
      for (int x = 0; x < 12; ++x) {
        LocalObservation o{x, y, {std::uint8_t(bits & 1), std::uint8_t((bits >> 1) & 1),
                                  std::uint8_t((bits >> 2) & 1)}};
        ++seen.at(o.Key(12));
      }
    }
  }
  for (int s : seen) EXPECT_EQ(s, 1);
}

TEST(GridEnvTest, FeaturesScaleCoordinates) {
  LocalObservation o{14, 0, {1}};
  double f[3];
  o.Features(15, f);
  EXPECT_DOUBLE_EQ(f[0], 1.0);
  EXPECT_DOUBLE_EQ(f[1], 0.0);
  EXPECT_DOUBLE_EQ(f[2], 1.0);
}

}  // namespace
}  // namespace mace
