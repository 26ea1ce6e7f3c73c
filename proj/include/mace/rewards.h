#ifndef MACE_REWARDS_H_
#define MACE_REWARDS_H_

#include <span>
#include <string_view>

namespace mace {

// Shaped-reward variants.
//   loc      r_ext + b * u^i
//   nov_sum  r_ext + b * sum_j u^j
//   nov_max  r_ext + b * max_j u^j
//   hin      r_ext + b * (u^i      + l * sum_{j!=i} z^j log(p/pi))
//   mace     r_ext + b * (sum_j u^j + l * sum_{j!=i} z^j log(p/pi))
//   mace_mi  r_ext + b * (sum_j u^j + l * sum_{j!=i} log(p/pi))
//   mace_z   r_ext + b * (sum_j u^j + l * sum_{j!=i} z^j)
//   hin_s    r_ext + b * (u^i      + l * z^{-i} log(p_s/pi))
//   mace_s   r_ext + b * (sum_j u^j + l * z^{-i} log(p_s/pi))
// where z^{-i} is the summed novelty of the other agents and p_s the
// posterior conditioned on it.
enum class RewardMode {
  kLoc,
  kNovSum,
  kNovMax,
  kHin,
  kMace,
  kMaceMi,
  kMaceZ,
  kMaceS,
  kHinS,
};

std::string_view RewardModeString(RewardMode mode);
// Throws ConfigError on unknown names.
RewardMode ParseRewardMode(std::string_view text);

// Whether the mode needs per-pair posteriors / the summed posterior.
bool UsesPairwisePosterior(RewardMode mode);
bool UsesSummedPosterior(RewardMode mode);
bool UsesHindsight(RewardMode mode);

inline constexpr double kPosteriorFloor = 1e-6;
inline constexpr double kPolicyFloor = 1e-12;

// log(max(p_hat, 1e-6) / pi)
double LogPosteriorRatio(double posterior, double policy);

// z * log(max(p_hat, 1e-6) / pi); zero whenever z is zero.
double HindsightReward(double z, double posterior, double policy);

// Per-step inputs for agent i. `z_others`/`log_ratio_others` hold one entry
// per other agent j != i. The summed fields feed the scalable modes.
struct HindsightTerms {
  std::span<const double> z_others;
  std::span<const double> log_ratio_others;
  double z_summed = 0.0;
  double log_ratio_summed = 0.0;
};

struct RewardBreakdown {
  double r_ext = 0.0;
  double r_nov = 0.0;  // novelty part before the beta scale
  double r_hin = 0.0;  // hindsight part before the lambda and beta scales
  double total = 0.0;
};

struct RewardWeights {
  double lambda = 0.01;
  double beta = 1.0;
};

RewardBreakdown ShapedReward(RewardMode mode, RewardWeights weights,
                             double r_ext, std::span<const double> novelties,
                             int agent, const HindsightTerms& terms);

}  // namespace mace

#endif  // MACE_REWARDS_H_
