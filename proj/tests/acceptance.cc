// Acceptance checks. Prints one "criterion N: PASS|FAIL ..." line each.
//
//   mace_acceptance fast                 criteria 1-6 and 10
//   mace_acceptance learning <out-dir>   criteria 7-9, plus 10 on those runs
//
// Exit status is nonzero when any printed criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mace/harness.h"
#include "mace/heatmap.h"
#include "mace/relabel.h"
#include "support.h"

namespace mace {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

int g_failures = 0;

void Report(int id, bool pass, const std::string& detail) {
  std::cout << "criterion " << id << ": " << (pass ? "PASS" : "FAIL") << "  "
            << detail << std::endl;
  if (!pass) ++g_failures;
}

double Seconds(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string Fmt(const char* format, double a, double b = 0.0, double c = 0.0,
                double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), format, a, b, c, d);
  return buf;
}

void Criterion1() {
  const auto start = Clock::now();
  std::vector<double> grid;
  for (int k = 1; k <= 19; ++k) grid.push_back(0.05 * k);
  double max_mi_gap = 0.0, min_wmi_margin = 1e300;
  for (const SweepRow& r : IllustrativeSweep(grid)) {
    max_mi_gap = std::max(max_mi_gap, std::abs(r.mi_s1 - r.mi_s2));
    min_wmi_margin = std::min(min_wmi_margin, r.wmi_s2 - r.wmi_s1);
  }
  const double t = Seconds(start);
  Report(1, max_mi_gap <= 1e-12 && min_wmi_margin > 0.0 && t < 1.0,
         Fmt("max |MI1-MI2| %.3g, min WMI2-WMI1 %.4f over 19 points, %.3f s",
             max_mi_gap, min_wmi_margin, t));
}

void Criterion2() {
  const auto start = Clock::now();
  bool ok = true;
  double worst_rel = 0.0, worst_abs = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const DiscreteJoint joint = testing::RandomJoint(4, 8, 100 + seed);
    const double exact = WeightedMutualInformation(joint);
    const double mc = testing::MonteCarloWmi(joint, 100000, 200 + seed);
    const double err = std::abs(mc - exact);
    if (exact < 0.25) {
      worst_abs = std::max(worst_abs, err);
      ok = ok && err <= 0.005;
    } else {
      worst_rel = std::max(worst_rel, err / exact);
      ok = ok && err <= 0.02 * exact;
    }
  }
  const double t = Seconds(start);
  Report(2, ok && t < 10.0,
         Fmt("10 joints x 1e5 draws, worst rel %.4f, worst abs %.5f, %.2f s",
             worst_rel, worst_abs, t));
}

void Criterion3() {
  const auto start = Clock::now();
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    testing::GradientCase c = testing::RandomGradientCase(seed);
    worst = std::max(worst, testing::GradientCheck(c.net, c.inputs, c.coeffs));
  }
  const double t = Seconds(start);
  Report(3, worst < 1e-4 && t < 30.0,
         Fmt("20 random networks, max relative error %.3g, %.2f s", worst, t));
}

RunConfig DeskConfig(RewardMode mode) {
  RunConfig c;
  c.task = TaskName::kPass;
  c.grid_size = 15;
  c.num_envs = 16;
  c.gamma = 0.99;
  c.lambda = 0.01;
  c.window = 10;
  c.num_bins = 30;
  c.mode = mode;
  c.decomposition_log = false;
  return c;
}

bool SameTraining(RewardMode a, RewardMode b, int iterations, std::uint64_t seed) {
  RunConfig ca = DeskConfig(a), cb = DeskConfig(b);
  ca.lambda = cb.lambda = 0.0;
  ca.iterations = cb.iterations = iterations;
  Trainer ta(ca, seed), tb(cb, seed);
  if (!testing::SameCurves(ta.Train(), tb.Train())) return false;
  for (int i = 0; i < ta.num_agents(); ++i) {
    if (ta.learner(i).policy().ParameterHash() != tb.learner(i).policy().ParameterHash() ||
        ta.learner(i).value().ParameterHash() != tb.learner(i).value().ParameterHash()) {
      return false;
    }
  }
  return true;
}

void Criterion4() {
  const auto start = Clock::now();
  const bool mace_nov = SameTraining(RewardMode::kMace, RewardMode::kNovSum, 3, 7);
  const bool hin_loc = SameTraining(RewardMode::kHin, RewardMode::kLoc, 3, 7);
  const double t = Seconds(start);
  Report(4, mace_nov && hin_loc && t < 120.0,
         std::string("mace(l=0)==nov_sum ") + (mace_nov ? "yes" : "no") +
             ", hin(l=0)==loc " + (hin_loc ? "yes" : "no") +
             Fmt(", 3 iterations on Pass 15x15, %.1f s", t));
}

void Criterion5() {
  const auto start = Clock::now();
  const int w = 10;
  const std::int64_t keys = 8;
  const int bins = 4;
  PosteriorTable table(keys, bins, w);
  Rng rng(5);
  std::uniform_int_distribution<int> size(0, 20);
  std::vector<PosteriorBatch> window;
  std::int64_t mismatches = 0;
  double worst_norm = 0.0;
  for (int step = 0; step < 1000; ++step) {
    window.push_back(testing::RandomPosteriorBatch(size(rng), keys, bins, rng));
    table.Update(window.back());
    if (window.size() > static_cast<std::size_t>(w)) window.erase(window.begin());
    for (std::int64_t key = 0; key < keys; ++key) {
      for (int bin = 0; bin < bins; ++bin) {
        const auto expect = testing::BruteForcePosterior(window, key, bin);
        const auto got = table.Query(key, bin);
        double sum = 0.0;
        for (int a = 0; a < kNumActions; ++a) {
          if (got[a] != expect[a]) ++mismatches;
          sum += got[a];
        }
        worst_norm = std::max(worst_norm, std::abs(sum - 1.0));
      }
    }
  }
  const bool held = table.batches_held() == w;
  const double t = Seconds(start);
  Report(5, mismatches == 0 && worst_norm <= 1e-12 && held && t < 10.0,
         Fmt("1000 insertions, %.0f recount mismatches, max |sum-1| %.3g, ",
             static_cast<double>(mismatches), worst_norm) +
             std::string("window held ") + (held ? "w" : "wrong") +
             Fmt(" batches, %.2f s", t));
}

void Criterion6() {
  const auto start = Clock::now();
  const double gamma = 0.99;
  const double top = 0.9 / (1.0 - gamma);
  Rng rng(6);
  std::lognormal_distribution<double> novelty(0.0, 1.0);
  std::uniform_real_distribution<double> scale(0.01, 100.0);
  std::bernoulli_distribution ends(0.01);
  bool invariant = true, in_range = true, k1 = true;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> u(3000);
    for (double& v : u) v = novelty(rng);
    const double c = scale(rng);
    std::vector<double> scaled(u.size());
    for (std::size_t k = 0; k < u.size(); ++k) scaled[k] = c * u[k];
    const RelabelResult base = Relabel(u);
    invariant = invariant && base.labels == Relabel(scaled).labels;

    std::vector<std::uint8_t> done(u.size());
    for (auto& d : done) d = ends(rng);
    std::vector<double> z(u.size());
    AccumulateSegments(base.labels, done, gamma, z);
    for (double v : z) in_range = in_range && v > 0.0 && v <= top;
    for (double v : z) k1 = k1 && DiscretizeZ(v, 1, gamma) == 0;
  }
  for (double v : {-5.0, 0.0, 1e-9, 10.0, 89.9, 90.0, 1e9}) {
    k1 = k1 && DiscretizeZ(v, 1, gamma) == 0;
  }
  const double t = Seconds(start);
  Report(6, invariant && in_range && k1 && t < 5.0,
         std::string("scale invariance ") + (invariant ? "yes" : "no") +
             ", z in (0, 0.9/(1-g)] " + (in_range ? "yes" : "no") +
             ", K=1 single bin " + (k1 ? "yes" : "no") + Fmt(", %.2f s", t));
}

// Bus accounting during training and silence during evaluation.
void Criterion10Fast() {
  bool ok = true;
  std::ostringstream detail;
  for (RewardMode mode : {RewardMode::kLoc, RewardMode::kNovSum, RewardMode::kNovMax,
                          RewardMode::kHin, RewardMode::kMace, RewardMode::kMaceS}) {
    RunConfig c = testing::TinyConfig(mode, 3);
    Trainer t(c, 11);
    t.Train();
    const std::int64_t expect = t.num_agents() * t.env_steps();
    const bool train_ok = t.bus().scalars_sent() == expect;
    const std::int64_t before = t.bus().scalars_sent();
    t.Evaluate(2);
    const bool eval_ok = t.bus().scalars_sent() == before;
    ok = ok && train_ok && eval_ok;
    if (!train_ok || !eval_ok) detail << ' ' << RewardModeString(mode);
  }
  Report(10, ok, "bus = N x env steps for 6 modes, 0 scalars during evaluation" +
                     (ok ? std::string() : " (violations:" + detail.str() + ")"));
}

double Median(std::vector<double> v) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Final value of a run: mean episode reward averaged over the last 10
// iterations.
double FinalReward(const std::vector<IterationRecord>& curve) {
  const std::size_t n = std::min<std::size_t>(10, curve.size());
  double sum = 0.0;
  for (std::size_t k = curve.size() - n; k < curve.size(); ++k) {
    sum += curve[k].mean_episode_reward;
  }
  return n ? sum / n : std::nan("");
}

std::string Join(const std::vector<double>& v) {
  std::string s;
  for (double x : v) s += (s.empty() ? "" : " ") + Fmt("%.1f", x);
  return s;
}

int Learning(const fs::path& out) {
  const std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4};
  const std::vector<RewardMode> modes = {RewardMode::kMace, RewardMode::kNovSum,
                                         RewardMode::kLoc, RewardMode::kNovMax};
  std::map<RewardMode, RunResult> runs;
  std::map<RewardMode, std::vector<double>> finals;
  bool bus_ok = true;
  for (RewardMode mode : modes) {
    RunConfig c = DeskConfig(mode);
    c.iterations = 300;
    c.seeds = seeds;
    c.decomposition_log = mode == RewardMode::kMace;
    c.output_dir = (out / std::string(RewardModeString(mode))).string();
    const auto start = Clock::now();
    runs[mode] = Run(c);
    for (const SeedResult& s : runs[mode].seeds) {
      if (!s.ok) {
        std::cerr << RewardModeString(mode) << " seed " << s.seed << " failed: " << s.error << '\n';
        continue;
      }
      finals[mode].push_back(FinalReward(s.curve));
      bus_ok = bus_ok && s.bus_scalars == s.num_agents * s.env_steps;
    }
    std::cerr << RewardModeString(mode) << " finals [" << Join(finals[mode]) << "] in "
              << Fmt("%.0f s", Seconds(start)) << std::endl;
  }

  const double m_mace = Median(finals[RewardMode::kMace]);
  const double m_nov = Median(finals[RewardMode::kNovSum]);
  const double m_loc = Median(finals[RewardMode::kLoc]);
  const double m_max = Median(finals[RewardMode::kNovMax]);
  const bool all_ok = finals[RewardMode::kMace].size() == seeds.size() &&
                      finals[RewardMode::kNovSum].size() == seeds.size() &&
                      finals[RewardMode::kLoc].size() == seeds.size();
  Report(7, all_ok && m_mace >= m_nov && m_nov > m_loc && m_mace >= 50.0 && m_loc < 10.0,
         Fmt("median final reward mace %.2f, nov_sum %.2f, loc %.2f, nov_max %.2f",
             m_mace, m_nov, m_loc, m_max) +
             " (need mace >= nov_sum > loc, mace >= 50, loc < 10)");

  // Agent 1 is the first agent. The heatmap is restricted to the room the
  // agents start in, where both switches lie, and averaged over the run.
  const TaskSpec spec = BuildTaskSpec(DeskConfig(RewardMode::kMace));
  const std::vector<std::uint8_t> left = RoomMask(spec.layout, spec.layout.starts[0]);
  const Cell sw1 = spec.layout.switches[0][0];
  int checked = 0, near = 0;
  std::string cells;
  for (const SeedResult& s : runs[RewardMode::kMace].seeds) {
    if (!s.ok || FinalReward(s.curve) < 50.0) continue;
    ++checked;
    const auto rows = ReadDecompositionCsv(s.dir / "decomposition.csv");
    Heatmap map = BuildHeatmap(rows, spec.grid_size, 0, RewardComponent::kHin, 0,
                               static_cast<int>(s.curve.size()));
    for (std::size_t k = 0; k < left.size(); ++k) {
      if (!left[k]) map.visits[k] = 0;
    }
    const auto best = map.Argmax();
    if (!best) continue;
    const int d = std::max(std::abs(best->x - sw1.x), std::abs(best->y - sw1.y));
    if (d <= 2) ++near;
    cells += " seed" + std::to_string(s.seed) + "=(" + std::to_string(best->x) + "," +
             std::to_string(best->y) + ")";
  }
  Report(8, near >= 3,
         std::to_string(checked) + " successful mace seeds, " + std::to_string(near) +
             " with argmax within 2 of switch 1 at (" + std::to_string(sw1.x) + "," +
             std::to_string(sw1.y) + "), need 3;" + (cells.empty() ? " none" : cells));

  // Report-only: a shortfall within two pooled standard errors of the seed
  // finals is not counted as a failure.
  auto se = [](const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    double mean = 0.0, ss = 0.0;
    for (double x : v) mean += x / v.size();
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / (v.size() - 1) / v.size());
  };
  const double noise = 2.0 * std::hypot(se(finals[RewardMode::kNovSum]),
                                        se(finals[RewardMode::kNovMax]));
  const bool ordered = m_nov >= m_max;
  const bool within_noise = !ordered && m_max - m_nov <= noise;
  Report(9, ordered || within_noise,
         Fmt("median nov_sum %.2f vs nov_max %.2f, noise band %.2f", m_nov, m_max, noise) +
             (ordered ? "" : within_noise ? " (report-only: within noise)" : ""));

  Report(10, bus_ok, "bus = N x env steps on all 20 learning runs");
  return g_failures ? 1 : 0;
}

int Fast() {
  Criterion1();
  Criterion2();
  Criterion3();
  Criterion4();
  Criterion5();
  Criterion6();
  Criterion10Fast();
  return g_failures ? 1 : 0;
}

}  // namespace
}  // namespace mace

int main(int argc, char** argv) {
  const std::string which = argc > 1 ? argv[1] : "fast";
  if (which == "fast") return mace::Fast();
  if (which == "learning") {
    const std::filesystem::path out = argc > 2 ? argv[2] : "acceptance_runs";
    return mace::Learning(out);
  }
  std::cerr << "usage: mace_acceptance fast | learning [out-dir]\n";
  return 2;
}
