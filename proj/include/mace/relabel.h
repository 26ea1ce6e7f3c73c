#ifndef MACE_RELABEL_H_
#define MACE_RELABEL_H_

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace mace {

// Discounted future sum z_t = u_t + gamma * z_{t+1}, with z_{T} = u_{T}.
std::vector<double> Accumulate(std::span<const double> u, double gamma);

// Same recursion over a concatenation of episodes: the sum restarts after
// every index with episode_end[t] != 0 and at the end of the span, so no
// accumulation crosses an episode boundary.
void AccumulateSegments(std::span<const double> u,
                        std::span<const std::uint8_t> episode_end,
                        double gamma, std::span<double> out);

// Nearest-rank percentile of an ascending-sorted, nonempty sample: the
// element at 1-based rank ceil(percent/100 * n).
double NearestRankPercentile(std::span<const double> sorted, double percent);

// Quintile relabeling of a sampling batch. The four edges are the 20th, 40th,
// 60th and 80th nearest-rank percentiles; a value equal to an edge falls in
// the lower bin.
struct RelabelBins {
  static constexpr std::array<double, 5> kLabels = {0.1, 0.3, 0.5, 0.7, 0.9};

  std::array<double, 4> edges{};

  int BinOf(double u) const;
  double Label(double u) const { return kLabels[BinOf(u)]; }
};

// Throws UsageError on an empty batch.
RelabelBins ComputeRelabelBins(std::span<const double> batch);

struct RelabelResult {
  RelabelBins bins;
  std::vector<double> labels;
};

RelabelResult Relabel(std::span<const double> batch);

// Uniform bins over [scale * 0.1/(1-gamma), scale * 0.9/(1-gamma)] with
// values outside clamped to the first/last bin. `scale` widens the range
// for sums of several agents' relabeled novelty.
int DiscretizeZ(double z, int num_bins, double gamma, double scale = 1.0);

}  // namespace mace

#endif  // MACE_RELABEL_H_
