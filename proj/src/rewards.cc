#include "mace/rewards.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "mace/errors.h"

namespace mace {

namespace {

struct ModeName {
  RewardMode mode;
  std::string_view name;
};

constexpr ModeName kModeNames[] = {
    {RewardMode::kLoc, "loc"},        {RewardMode::kNovSum, "nov_sum"},
    {RewardMode::kNovMax, "nov_max"}, {RewardMode::kHin, "hin"},
    {RewardMode::kMace, "mace"},      {RewardMode::kMaceMi, "mace_mi"},
    {RewardMode::kMaceZ, "mace_z"},   {RewardMode::kMaceS, "mace_s"},
    {RewardMode::kHinS, "hin_s"},
};

}  // namespace

std::string_view RewardModeString(RewardMode mode) {
  for (const ModeName& m : kModeNames) {
    if (m.mode == mode) return m.name;
  }
  return "unknown";
}

RewardMode ParseRewardMode(std::string_view text) {
  for (const ModeName& m : kModeNames) {
    if (m.name == text) return m.mode;
  }
  throw ConfigError("unknown reward mode '" + std::string(text) + "'");
}

bool UsesPairwisePosterior(RewardMode mode) {
  return mode == RewardMode::kHin || mode == RewardMode::kMace ||
         mode == RewardMode::kMaceMi;
}

bool UsesSummedPosterior(RewardMode mode) {
  return mode == RewardMode::kMaceS || mode == RewardMode::kHinS;
}

bool UsesHindsight(RewardMode mode) {
  return UsesPairwisePosterior(mode) || UsesSummedPosterior(mode) ||
         mode == RewardMode::kMaceZ;
}

double LogPosteriorRatio(double posterior, double policy) {
  return std::log(std::max(posterior, kPosteriorFloor) /
                  std::max(policy, kPolicyFloor));
}

double HindsightReward(double z, double posterior, double policy) {
  if (z == 0.0) return 0.0;
  return z * LogPosteriorRatio(posterior, policy);
}

RewardBreakdown ShapedReward(RewardMode mode, RewardWeights weights,
                             double r_ext, std::span<const double> novelties,
                             int agent, const HindsightTerms& terms) {
  if (agent < 0 || agent >= static_cast<int>(novelties.size())) {
    throw UsageError("shaped reward: agent index out of range");
  }
  double sum_u = 0.0;
  for (double u : novelties) sum_u += u;
  const double own_u = novelties[agent];

  double pairwise = 0.0;
  double log_only = 0.0;
  double z_only = 0.0;
  for (std::size_t k = 0; k < terms.z_others.size(); ++k) {
    z_only += terms.z_others[k];
    if (k < terms.log_ratio_others.size()) {
      log_only += terms.log_ratio_others[k];
      if (terms.z_others[k] != 0.0) {
        pairwise += terms.z_others[k] * terms.log_ratio_others[k];
      }
    }
  }
  const double summed = terms.z_summed == 0.0
                            ? 0.0
                            : terms.z_summed * terms.log_ratio_summed;

  RewardBreakdown out;
  out.r_ext = r_ext;
  switch (mode) {
    case RewardMode::kLoc:
      out.r_nov = own_u;
      break;
    case RewardMode::kNovSum:
      out.r_nov = sum_u;
      break;
    case RewardMode::kNovMax:
      out.r_nov = *std::max_element(novelties.begin(), novelties.end());
      break;
    case RewardMode::kHin:
      out.r_nov = own_u;
      out.r_hin = pairwise;
      break;
    case RewardMode::kMace:
      out.r_nov = sum_u;
      out.r_hin = pairwise;
      break;
    case RewardMode::kMaceMi:
      out.r_nov = sum_u;
      out.r_hin = log_only;
      break;
    case RewardMode::kMaceZ:
      out.r_nov = sum_u;
      out.r_hin = z_only;
      break;
    case RewardMode::kMaceS:
      out.r_nov = sum_u;
      out.r_hin = summed;
      break;
    case RewardMode::kHinS:
      out.r_nov = own_u;
      out.r_hin = summed;
      break;
    default:
      throw ConfigError("unknown reward mode");
  }
  const bool novelty_only = mode == RewardMode::kLoc ||
                            mode == RewardMode::kNovSum ||
                            mode == RewardMode::kNovMax;
  const double intrinsic =
      novelty_only ? out.r_nov : out.r_nov + weights.lambda * out.r_hin;
  out.total = r_ext + weights.beta * intrinsic;
  return out;
}

}  // namespace mace
