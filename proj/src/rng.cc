#include "mace/rng.h"

namespace mace {

std::uint64_t Mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t DeriveSeed(std::uint64_t master,
                         std::initializer_list<std::uint64_t> path) {
  std::uint64_t state = Mix64(master);
  for (std::uint64_t id : path) state = Mix64(state ^ Mix64(id + 1));
  return state;
}

}  // namespace mace
