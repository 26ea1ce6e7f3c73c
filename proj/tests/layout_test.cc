#include <gtest/gtest.h>

#include <filesystem>

#include "mace/errors.h"
#include "mace/grid_env.h"
#include "mace/layout.h"

namespace mace {
namespace {

TEST(LayoutTest, ParsesLegend) {
  const Layout l = ParseLayout(
      "; two rooms\n"
      "S..#...\n"
      "S..#...\n"
      "...A...\n"
      "1..#..2\n"
      "...#...\n"
      "...#...\n"
      "...#..T\n");
  EXPECT_EQ(l.size, 7);
  ASSERT_EQ(l.starts.size(), 2u);
  EXPECT_EQ(l.starts[0], (Cell{0, 0}));
  EXPECT_EQ(l.starts[1], (Cell{0, 1}));
  ASSERT_EQ(l.num_doors(), 1);
  EXPECT_EQ(l.doors[0][0], (Cell{3, 2}));
  ASSERT_EQ(l.num_switches(), 2);
  EXPECT_EQ(l.switches[1][0], (Cell{6, 3}));
  EXPECT_EQ(l.Kind(3, 0), CellKind::kWall);
  EXPECT_TRUE(l.IsTarget(4, 0));
  EXPECT_TRUE(l.IsTarget(6, 6));
  EXPECT_FALSE(l.IsTarget(3, 2));
  EXPECT_FALSE(l.IsTarget(0, 0));
}

TEST(LayoutTest, RejectsMalformedMaps) {
  EXPECT_THROW(ParseLayout(""), ConfigError);
  EXPECT_THROW(ParseLayout("...\n..\n...\n"), ConfigError);
  EXPECT_THROW(ParseLayout("..T\n.x.\n...\n"), ConfigError);
  EXPECT_THROW(ParseLayout("...\n...\n...\n"), ConfigError);      // no target
  EXPECT_THROW(ParseLayout("2.T\n...\n...\n"), ConfigError);      // switch gap
  EXPECT_THROW(ParseLayout("B.T\n...\n...\n"), ConfigError);      // door gap
}

TEST(LayoutTest, FormatRoundTrips) {
  for (TaskName t : {TaskName::kPass, TaskName::kSecretRoom, TaskName::kMultiRoom}) {
    const std::string text = GenerateLayoutText(t, 15);
    const Layout l = ParseLayout(text);
    EXPECT_EQ(FormatLayout(l), text);
  }
}

TEST(LayoutTest, GeneratedLayoutsSatisfyTaskInvariants) {
  for (TaskName t : {TaskName::kPass, TaskName::kSecretRoom, TaskName::kMultiRoom}) {
    for (int g : {12, 15, 20, 30}) {
      EXPECT_NO_THROW(MakeTaskSpec(t, g)) << TaskNameString(t) << " " << g;
    }
  }
}

TEST(LayoutTest, ShippedLayoutFilesMatchGenerator) {
  const std::filesystem::path dir(MACE_LAYOUT_DIR);
  for (TaskName t : {TaskName::kPass, TaskName::kSecretRoom, TaskName::kMultiRoom}) {
    for (int g : {15, 30}) {
      const auto path = dir / (std::string(TaskNameString(t)) + "_" + std::to_string(g) + ".txt");
      ASSERT_TRUE(std::filesystem::exists(path)) << path;
      const Layout file = LoadLayoutFile(path);
      EXPECT_EQ(FormatLayout(file), GenerateLayoutText(t, g)) << path;
    }
  }
}

TEST(LayoutTest, RoomMaskStopsAtWallsAndDoors) {
  const TaskSpec spec = MakeTaskSpec(TaskName::kPass, 15);
  const auto left = RoomMask(spec.layout, spec.layout.starts[0]);
  int count = 0;
  for (auto v : left) count += v;
  EXPECT_EQ(count, 7 * 15);
  EXPECT_TRUE(left[spec.layout.Index(0, 14)]);
  EXPECT_FALSE(left[spec.layout.Index(8, 0)]);
}

TEST(LayoutTest, PassTargetIsTheRightRoom) {
  const TaskSpec spec = MakeTaskSpec(TaskName::kPass, 15);
  int count = 0;
  for (auto v : spec.layout.target) count += v;
  EXPECT_EQ(count, 7 * 15);
  EXPECT_TRUE(spec.layout.IsTarget(8, 0));
}

TEST(LayoutTest, ValidationRejectsBrokenTasks) {
  // door not on a wall segment
  EXPECT_THROW(MakeTaskSpec(TaskName::kPass, ParseLayout(
      "SS.#...\n"
      "...#...\n"
      "..A....\n"
      "1..#..2\n"
      "...#...\n"
      "...#...\n"
      "...#..T\n")), ConfigError);
  // wrong agent count for the task
  EXPECT_THROW(MakeTaskSpec(TaskName::kMultiRoom, GenerateLayoutText(TaskName::kPass, 15).empty()
                                                      ? Layout{}
                                                      : ParseLayout(GenerateLayoutText(TaskName::kPass, 15))),
               ConfigError);
  // start inside the target room
  EXPECT_THROW(MakeTaskSpec(TaskName::kPass, ParseLayout(
      "S..#..S\n"
      "...#...\n"
      "...A...\n"
      "1..#..2\n"
      "...#...\n"
      "...#...\n"
      "...#..T\n")), ConfigError);
}

TEST(LayoutTest, TaskNamesParseLoosely) {
  EXPECT_EQ(ParseTaskName("Pass"), TaskName::kPass);
  EXPECT_EQ(ParseTaskName("SecretRoom"), TaskName::kSecretRoom);
  EXPECT_EQ(ParseTaskName("multi_room"), TaskName::kMultiRoom);
  EXPECT_THROW(ParseTaskName("maze"), ConfigError);
}

}  // namespace
}  // namespace mace
