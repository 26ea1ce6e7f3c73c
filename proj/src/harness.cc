#include "mace/harness.h"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "mace/errors.h"

namespace fs = std::filesystem;

namespace mace {

namespace {

std::string Num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::ofstream OpenOut(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void CheckWritten(std::ostream& out, const fs::path& path) {
  out.flush();
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

void WriteDecomposition(std::ostream& out, const std::vector<CellStats>& rows) {
  for (const CellStats& c : rows) {
    out << c.iteration << ',' << c.agent << ',' << c.x << ',' << c.y << ','
        << c.visits << ',' << Num(c.r_nov) << ',' << Num(c.r_hin) << ','
        << Num(c.r_ext) << '\n';
  }
}

void SaveCheckpoints(const Trainer& trainer, const fs::path& dir,
                     const std::string& suffix) {
  for (int i = 0; i < trainer.num_agents(); ++i) {
    const std::string stem = "agent" + std::to_string(i);
    const fs::path pp = dir / (stem + "_policy" + suffix + ".bin");
    const fs::path vp = dir / (stem + "_value" + suffix + ".bin");
    std::ofstream p = OpenOut(pp);
    trainer.learner(i).policy().Save(p);
    CheckWritten(p, pp);
    std::ofstream v = OpenOut(vp);
    trainer.learner(i).value().Save(v);
    CheckWritten(v, vp);
  }
}

SeedResult RunSeed(const RunConfig& config, std::uint64_t seed,
                   const fs::path& root, std::ostream* progress) {
  SeedResult res;
  res.seed = seed;
  res.dir = root / ("seed_" + std::to_string(seed));
  try {
    fs::create_directories(res.dir);
    Trainer trainer(config, seed);
    res.num_agents = trainer.num_agents();

    std::ofstream decomposition;
    if (config.decomposition_log) {
      decomposition = OpenOut(res.dir / "decomposition.csv");
      decomposition << "iteration,agent,x,y,visits,r_nov,r_hin,r_ext\n";
    }
    std::ofstream steps;
    if (config.step_log) {
      steps = OpenOut(res.dir / "steps.csv");
      trainer.SetStepLog(&steps);
    }
    std::ofstream trace;
    if (config.bus_trace) {
      trace = OpenOut(res.dir / "bus_trace.csv");
      trainer.SetBusTrace(&trace);
    }

    for (int it = 0; it < config.iterations; ++it) {
      const IterationRecord rec = trainer.RunIteration();
      res.curve.push_back(rec);
      if (config.decomposition_log) {
        WriteDecomposition(decomposition, trainer.decomposition());
        if (!decomposition) throw std::runtime_error("write failed for decomposition.csv");
      }
      if (config.checkpoint_every > 0 && (it + 1) % config.checkpoint_every == 0) {
        SaveCheckpoints(trainer, res.dir, "_" + std::to_string(it + 1));
      }
      if (progress) {
        *progress << "seed " << seed << " iter " << rec.iteration
                  << " reward " << rec.mean_episode_reward << " success "
                  << rec.success_rate << " r_nov " << rec.mean_r_nov
                  << " r_hin " << rec.mean_r_hin;
        for (int i = 0; i < trainer.num_agents(); ++i) {
          const PpoStats& st = trainer.last_ppo_stats(i);
          *progress << " | a" << i << " H " << st.entropy << " kl "
                    << st.approx_kl << " clip " << st.clip_fraction;
        }
        *progress << '\n';
      }
    }
    if (config.decomposition_log) CheckWritten(decomposition, res.dir / "decomposition.csv");
    if (config.step_log) CheckWritten(steps, res.dir / "steps.csv");
    if (config.bus_trace) CheckWritten(trace, res.dir / "bus_trace.csv");

    WriteCurveCsv(res.dir / "curve.csv", res.curve);
    SaveCheckpoints(trainer, res.dir, "");
    res.env_steps = trainer.env_steps();
    res.bus_scalars = trainer.bus().scalars_sent();
    if (config.eval_episodes > 0) {
      res.eval = trainer.Evaluate(config.eval_episodes, true);
      const fs::path ep = res.dir / "eval.csv";
      std::ofstream e = OpenOut(ep);
      e << "episodes,success_rate,mean_episode_reward,mean_length\n"
        << res.eval.episodes << ',' << Num(res.eval.success_rate) << ','
        << Num(res.eval.mean_episode_reward) << ','
        << Num(res.eval.mean_length) << '\n';
      CheckWritten(e, ep);
    }
    res.ok = true;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    res.ok = false;
    res.error = e.what();
    if (progress) *progress << "seed " << seed << " aborted: " << e.what() << '\n';
  }
  return res;
}

}  // namespace

fs::path ResolveOutputDir(const std::string& output_dir) {
  fs::path p(output_dir);
  if (p.is_relative()) {
    const char* root = std::getenv("MACE_OUTPUT_ROOT");
    if (root != nullptr && *root != '\0') return fs::path(root) / p;
  }
  return p;
}

void WriteCurveCsv(const fs::path& path,
                   const std::vector<IterationRecord>& curve) {
  std::ofstream out = OpenOut(path);
  out << "iteration,env_steps,mean_episode_reward,mean_r_nov,mean_r_hin,"
         "success_rate,episodes\n";
  for (const IterationRecord& r : curve) {
    out << r.iteration << ',' << r.env_steps << ','
        << Num(r.mean_episode_reward) << ',' << Num(r.mean_r_nov) << ','
        << Num(r.mean_r_hin) << ',' << Num(r.success_rate) << ','
        << r.episodes << '\n';
  }
  CheckWritten(out, path);
}

std::vector<IterationRecord> ReadCurveCsv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open curve " + path.string());
  std::string line;
  std::getline(in, line);
  std::vector<IterationRecord> curve;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    IterationRecord r;
    // The trailing episodes column is optional.
    if (std::sscanf(line.c_str(), "%d,%" SCNd64 ",%lf,%lf,%lf,%lf,%d",
                    &r.iteration, &r.env_steps, &r.mean_episode_reward,
                    &r.mean_r_nov, &r.mean_r_hin, &r.success_rate,
                    &r.episodes) < 6) {
      throw ConfigError("malformed curve row in " + path.string() + ": " + line);
    }
    curve.push_back(r);
  }
  return curve;
}

std::vector<AggregateRow> Aggregate(
    const std::vector<std::vector<IterationRecord>>& curves) {
  std::vector<AggregateRow> rows;
  if (curves.empty()) return rows;
  std::size_t len = curves.front().size();
  for (const auto& c : curves) len = std::min(len, c.size());
  const int n = static_cast<int>(curves.size());
  for (std::size_t t = 0; t < len; ++t) {
    AggregateRow row;
    row.iteration = curves.front()[t].iteration;
    row.env_steps = curves.front()[t].env_steps;
    row.num_seeds = n;
    for (int m = 0; m < 4; ++m) {
      auto value = [&](const IterationRecord& r) {
        switch (m) {
          case 0: return r.mean_episode_reward;
          case 1: return r.mean_r_nov;
          case 2: return r.mean_r_hin;
          default: return r.success_rate;
        }
      };
      double sum = 0.0;
      for (const auto& c : curves) sum += value(c[t]);
      const double mean = sum / n;
      double ss = 0.0;
      for (const auto& c : curves) ss += (value(c[t]) - mean) * (value(c[t]) - mean);
      row.mean[m] = mean;
      row.stderr_[m] = n > 1 ? std::sqrt(ss / (n - 1)) / std::sqrt(static_cast<double>(n)) : 0.0;
    }
    rows.push_back(row);
  }
  return rows;
}

namespace {

void WriteAggregateHeader(std::ostream& out) {
  out << "iteration,env_steps,num_seeds";
  for (const char* m : kCurveMetrics) out << ',' << m << "_mean," << m << "_se";
  out << '\n';
}

void WriteAggregateRow(std::ostream& out, const AggregateRow& r) {
  out << r.iteration << ',' << r.env_steps << ',' << r.num_seeds;
  for (int m = 0; m < 4; ++m) out << ',' << Num(r.mean[m]) << ',' << Num(r.stderr_[m]);
  out << '\n';
}

}  // namespace

void WriteAggregateCsv(const fs::path& path,
                       const std::vector<AggregateRow>& rows) {
  std::ofstream out = OpenOut(path);
  WriteAggregateHeader(out);
  for (const AggregateRow& r : rows) WriteAggregateRow(out, r);
  CheckWritten(out, path);
}

RunResult Run(const RunConfig& config, std::ostream* progress) {
  ValidateConfig(config);
  BuildTaskSpec(config);  // layout errors surface before any rollout
  RunResult result;
  result.dir = ResolveOutputDir(config.output_dir);
  fs::create_directories(result.dir);
  {
    const fs::path cp = result.dir / "config.json";
    std::ofstream out = OpenOut(cp);
    out << SerializeConfig(config);
    CheckWritten(out, cp);
  }
  std::vector<std::vector<IterationRecord>> curves;
  for (std::uint64_t seed : config.seeds) {
    result.seeds.push_back(RunSeed(config, seed, result.dir, progress));
    if (result.seeds.back().ok) curves.push_back(result.seeds.back().curve);
  }
  result.aggregate = Aggregate(curves);
  WriteAggregateCsv(result.dir / "aggregate.csv", result.aggregate);
  return result;
}

AblationAxis ParseAblationAxis(std::string_view text) {
  if (text == "mode") return AblationAxis::kMode;
  if (text == "lambda") return AblationAxis::kLambda;
  if (text == "window" || text == "w") return AblationAxis::kWindow;
  if (text == "sum_vs_max") return AblationAxis::kSumVsMax;
  throw ConfigError("unknown ablation axis '" + std::string(text) +
                    "' (expected mode, lambda, window or sum_vs_max)");
}

std::string_view AblationAxisString(AblationAxis axis) {
  switch (axis) {
    case AblationAxis::kMode: return "mode";
    case AblationAxis::kLambda: return "lambda";
    case AblationAxis::kWindow: return "window";
    case AblationAxis::kSumVsMax: return "sum_vs_max";
  }
  return "unknown";
}

std::vector<Variant> AblationVariants(const RunConfig& base, AblationAxis axis) {
  std::vector<Variant> out;
  const fs::path root = fs::path(base.output_dir) / std::string(AblationAxisString(axis));
  auto add = [&](std::string name, RunConfig c) {
    c.output_dir = (root / name).string();
    out.push_back({std::move(name), std::move(c)});
  };
  switch (axis) {
    case AblationAxis::kMode:
      for (RewardMode m : {RewardMode::kLoc, RewardMode::kNovSum, RewardMode::kHin, RewardMode::kMace}) {
        RunConfig c = base;
        c.mode = m;
        add(std::string(RewardModeString(m)), c);
      }
      break;
    case AblationAxis::kLambda:
      for (const char* l : {"0.1", "0.01", "0.001"}) {
        RunConfig c = base;
        c.lambda = std::stod(l);
        add(l, c);
      }
      break;
    case AblationAxis::kWindow:
      for (int w : {1, 10, 50}) {
        RunConfig c = base;
        c.window = w;
        add(std::to_string(w), c);
      }
      break;
    case AblationAxis::kSumVsMax:
      for (RewardMode m : {RewardMode::kNovSum, RewardMode::kNovMax}) {
        RunConfig c = base;
        c.mode = m;
        add(std::string(RewardModeString(m)), c);
      }
      break;
  }
  return out;
}

AblationResult Ablate(const RunConfig& base, AblationAxis axis,
                      std::ostream* progress) {
  ValidateConfig(base);
  const std::vector<Variant> variants = AblationVariants(base, axis);
  for (const Variant& v : variants) ValidateConfig(v.config);

  AblationResult result;
  for (const Variant& v : variants) {
    if (progress) *progress << "variant " << v.name << '\n';
    result.runs.emplace_back(v.name, Run(v.config, progress));
  }
  result.report = ResolveOutputDir(base.output_dir) /
                  ("ablation_" + std::string(AblationAxisString(axis)) + ".csv");
  fs::create_directories(result.report.parent_path());
  std::ofstream out = OpenOut(result.report);
  out << "variant,";
  WriteAggregateHeader(out);
  for (const auto& [name, run] : result.runs) {
    for (const AggregateRow& r : run.aggregate) {
      out << name << ',';
      WriteAggregateRow(out, r);
    }
  }
  CheckWritten(out, result.report);
  return result;
}

}  // namespace mace
