#include "mace/relabel.h"

#include <algorithm>
#include <cmath>

#include "mace/errors.h"

namespace mace {

std::vector<double> Accumulate(std::span<const double> u, double gamma) {
  std::vector<double> z(u.size());
  double running = 0.0;
  for (std::size_t t = u.size(); t-- > 0;) {
    running = u[t] + gamma * running;
    z[t] = running;
  }
  return z;
}

void AccumulateSegments(std::span<const double> u,
                        std::span<const std::uint8_t> episode_end,
                        double gamma, std::span<double> out) {
  if (episode_end.size() != u.size() || out.size() != u.size()) {
    throw UsageError("accumulate: mismatched sequence lengths");
  }
  double running = 0.0;
  for (std::size_t t = u.size(); t-- > 0;) {
    if (episode_end[t]) running = 0.0;
    running = u[t] + gamma * running;
    out[t] = running;
  }
}

double NearestRankPercentile(std::span<const double> sorted, double percent) {
  if (sorted.empty()) throw UsageError("percentile of an empty sample");
  const double n = static_cast<double>(sorted.size());
  auto rank = static_cast<std::int64_t>(std::ceil(percent / 100.0 * n));
  rank = std::clamp<std::int64_t>(rank, 1, static_cast<std::int64_t>(n));
  return sorted[rank - 1];
}

int RelabelBins::BinOf(double u) const {
  int bin = 0;
  for (double e : edges) bin += u > e;
  return bin;
}

RelabelBins ComputeRelabelBins(std::span<const double> batch) {
  if (batch.empty()) throw UsageError("relabel needs a nonempty batch");
  std::vector<double> sorted(batch.begin(), batch.end());
  std::sort(sorted.begin(), sorted.end());
  RelabelBins bins;
  for (int k = 0; k < 4; ++k) {
    bins.edges[k] = NearestRankPercentile(sorted, 20.0 * (k + 1));
  }
  return bins;
}

RelabelResult Relabel(std::span<const double> batch) {
  RelabelResult result{ComputeRelabelBins(batch), {}};
  result.labels.reserve(batch.size());
  for (double u : batch) result.labels.push_back(result.bins.Label(u));
  return result;
}

int DiscretizeZ(double z, int num_bins, double gamma, double scale) {
  if (num_bins <= 0) throw UsageError("discretize needs at least one bin");
  const double lo = scale * 0.1 / (1.0 - gamma);
  const double hi = scale * 0.9 / (1.0 - gamma);
  const double pos = (z - lo) / (hi - lo) * num_bins;
  if (!(pos > 0.0)) return 0;
  return std::min(static_cast<int>(pos), num_bins - 1);
}

}  // namespace mace
