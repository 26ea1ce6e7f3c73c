#ifndef MACE_RNG_H_
#define MACE_RNG_H_

#include <cstdint>
#include <initializer_list>
#include <random>

namespace mace {

using Rng = std::mt19937_64;

// SplitMix64 finalizer.
std::uint64_t Mix64(std::uint64_t x);

// Derives an independent stream seed from a master seed and a path of
// stream identifiers, e.g. DeriveSeed(master, {kPolicyStream, env, agent}).
// Each path component is folded in with a SplitMix64 round, so sibling
// streams never share state.
std::uint64_t DeriveSeed(std::uint64_t master,
                         std::initializer_list<std::uint64_t> path);

// Stream tags used by the trainer.
enum StreamTag : std::uint64_t {
  kPolicyInitStream = 1,
  kValueInitStream = 2,
  kActionStream = 3,
  kRndStream = 4,
  kPosteriorStream = 5,
  kEnvStream = 6,
};

}  // namespace mace

#endif  // MACE_RNG_H_
