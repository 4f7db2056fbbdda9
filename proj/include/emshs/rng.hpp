#pragma once

#include <cstdint>
#include <random>

namespace emshs {

// Named streams so that each stochastic component of a run can be
// regenerated on its own from the run seed.
enum class Stream : std::uint64_t {
  prior_mc = 1,
  graph = 2,
  sign = 3,
  working_graph = 4,
  data = 5,
  folds = 6,
  replicate = 7,
};

/// Engine for (seed, stream, index); distinct triples give independent streams.
inline std::mt19937_64 make_engine(std::uint64_t seed, Stream stream, std::uint64_t index = 0) {
  const auto s = static_cast<std::uint64_t>(stream);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace emshs
