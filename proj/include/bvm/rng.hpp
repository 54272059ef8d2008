#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace bvm {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent stream seed for (master, id0, id1, ...). Used for
// replication / chain / purpose streams so results never depend on
// scheduling order.
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> ids) {
  std::uint64_t h = splitmix64(master);
  for (std::uint64_t id : ids) h = splitmix64(h ^ splitmix64(id + 0x632be59bd9b4e019ULL));
  return h;
}

inline Rng make_rng(std::uint64_t master, std::initializer_list<std::uint64_t> ids) {
  return Rng(derive_seed(master, ids));
}

// Stream purposes, so that e.g. the data stream of replication r is distinct
// from its sampler stream.
enum class Stream : std::uint64_t {
  kData = 1,
  kSplit = 2,
  kChain = 3,
  kDirichlet = 4,
  kSanity = 5,
  kDensityChain = 6,
  kPilot = 7,
};

inline std::uint64_t stream_id(Stream s) { return static_cast<std::uint64_t>(s); }

}  // namespace bvm
