#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mace/config.h"
#include "mace/errors.h"
#include "mace/harness.h"
#include "mace/heatmap.h"
#include "mace/layout.h"
#include "mace/wmi.h"

namespace fs = std::filesystem;

namespace {

// "start:stop:step", stop inclusive.
std::vector<double> ParseGrid(const std::string& text) {
  double start, stop, step;
  char tail;
  if (std::sscanf(text.c_str(), "%lf:%lf:%lf%c", &start, &stop, &step, &tail) != 3 ||
      !(step > 0) || stop < start) {
    throw mace::ConfigError("--grid expects start:stop:step with step > 0, got '" + text + "'");
  }
  const long n = std::lround(std::floor((stop - start) / step + 1e-9)) + 1;
  std::vector<double> grid;
  for (long k = 0; k < n; ++k) grid.push_back(start + static_cast<double>(k) * step);
  return grid;
}

int Train(const std::string& path, bool quiet) {
  const mace::RunConfig config = mace::LoadConfig(path);
  const mace::RunResult run = mace::Run(config, quiet ? nullptr : &std::cerr);
  int failed = 0;
  for (const mace::SeedResult& s : run.seeds) {
    if (!s.ok) {
      ++failed;
      std::cout << "seed " << s.seed << " FAILED: " << s.error << '\n';
      continue;
    }
    const double last = s.curve.empty() ? 0.0 : s.curve.back().mean_episode_reward;
    std::cout << "seed " << s.seed << " final_reward " << last << " env_steps "
              << s.env_steps << " bus_scalars " << s.bus_scalars << " dir "
              << s.dir.string() << '\n';
  }
  std::cout << "aggregate " << (run.dir / "aggregate.csv").string() << '\n';
  return failed == 0 ? 0 : 1;
}

int Ablate(const std::string& path, const std::string& axis, bool quiet) {
  const mace::RunConfig config = mace::LoadConfig(path);
  const mace::AblationResult res =
      mace::Ablate(config, mace::ParseAblationAxis(axis), quiet ? nullptr : &std::cerr);
  for (const auto& [name, run] : res.runs) {
    const double last = run.aggregate.empty() ? 0.0 : run.aggregate.back().mean[0];
    std::cout << "variant " << name << " final_reward_mean " << last << '\n';
  }
  std::cout << "report " << res.report.string() << '\n';
  return 0;
}

int WmiDemo(const std::string& grid_text, const std::string& out_path) {
  const std::vector<double> grid = ParseGrid(grid_text);
  std::ofstream file;
  std::ostream* out = &std::cout;
  if (!out_path.empty()) {
    file.open(out_path);
    if (!file) throw std::runtime_error("cannot write " + out_path);
    out = &file;
  }
  *out << "p_a1,mi_s1,mi_s2,wmi_s1,wmi_s2\n";
  char buf[200];
  for (const mace::SweepRow& r : mace::IllustrativeSweep(grid)) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g\n", r.p_a1,
                  r.mi_s1, r.mi_s2, r.wmi_s1, r.wmi_s2);
    *out << buf;
  }
  return 0;
}

mace::RunConfig FindRunConfig(const fs::path& dir) {
  for (const fs::path& p : {dir / "config.json", dir.parent_path() / "config.json"}) {
    if (fs::exists(p)) return mace::LoadConfig(p);
  }
  throw mace::ConfigError("no config.json in " + dir.string() + " or its parent");
}

int HeatmapCmd(const std::string& dir_text, int agent, const std::string& component,
               int from, int to, const std::string& out_path) {
  const fs::path dir(dir_text);
  const mace::RunConfig config = FindRunConfig(dir);
  const int grid = mace::BuildTaskSpec(config).grid_size;
  const auto rows = mace::ReadDecompositionCsv(dir / "decomposition.csv");
  const mace::RewardComponent comp = mace::ParseRewardComponent(component);
  if (to < 0) to = config.iterations;
  const mace::Heatmap map = mace::BuildHeatmap(rows, grid, agent, comp, from, to);

  const fs::path csv = out_path.empty()
                           ? dir / ("heatmap_agent" + std::to_string(agent) + "_" +
                                    std::string(mace::RewardComponentString(comp)) + ".csv")
                           : fs::path(out_path);
  std::ofstream out(csv);
  if (!out) throw std::runtime_error("cannot write " + csv.string());
  mace::WriteHeatmapCsv(out, map);
  const std::string text = mace::FormatHeatmapGrid(map);
  fs::path txt = csv;
  txt.replace_extension(".txt");
  std::ofstream(txt) << text;
  std::cout << text;
  if (const auto best = map.Argmax()) {
    std::cout << "argmax " << best->x << ' ' << best->y << '\n';
  }
  std::cout << "csv " << csv.string() << '\n';
  return 0;
}

int LayoutCmd(const std::string& task, int grid) {
  std::cout << mace::GenerateLayoutText(mace::ParseTaskName(task), grid);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MACE GridWorld workbench"};
  app.require_subcommand(1);

  std::string config_path;
  bool quiet = false;
  auto* train = app.add_subcommand("train", "train every seed of a run config");
  train->add_option("config", config_path, "JSON run config")->required();
  train->add_flag("-q,--quiet", quiet, "no per-iteration progress on stderr");

  std::string axis;
  auto* ablate = app.add_subcommand("ablate", "run an ablation matrix");
  ablate->add_option("config", config_path, "JSON base config")->required();
  ablate->add_option("--axis", axis, "mode | lambda | window | sum_vs_max")->required();
  ablate->add_flag("-q,--quiet", quiet, "no per-iteration progress on stderr");

  std::string grid_text = "0.05:0.95:0.05";
  std::string out_path;
  auto* wmi = app.add_subcommand("wmi-demo", "MI/WMI sweep over p(a1) as CSV");
  wmi->add_option("--grid", grid_text, "start:stop:step (stop inclusive)");
  wmi->add_option("-o,--out", out_path, "write CSV here instead of stdout");

  std::string run_dir;
  std::string component = "hin";
  int agent = 0;
  int from = 0;
  int to = -1;
  auto* heat = app.add_subcommand("heatmap", "per-cell mean reward component");
  heat->add_option("run-dir", run_dir, "seed directory holding decomposition.csv")->required();
  heat->add_option("--agent", agent, "agent index");
  heat->add_option("--component", component, "nov | hin | ext");
  heat->add_option("--from", from, "first iteration (inclusive)");
  heat->add_option("--to", to, "last iteration (exclusive); default: all");
  heat->add_option("-o,--out", out_path, "CSV path");

  std::string task = "pass";
  int grid = 30;
  auto* layout = app.add_subcommand("layout", "print a generated task layout");
  layout->add_option("--task", task, "pass | secret_room | multi_room");
  layout->add_option("--grid-size", grid, "cells per side");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) return Train(config_path, quiet);
    if (*ablate) return Ablate(config_path, axis, quiet);
    if (*wmi) return WmiDemo(grid_text, out_path);
    if (*heat) return HeatmapCmd(run_dir, agent, component, from, to, out_path);
    if (*layout) return LayoutCmd(task, grid);
  } catch (const mace::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
