#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace fodkq {

enum class StreamTag : std::uint64_t { Directions = 1, Mask = 2, Noise = 3, Phase = 4, PowerIteration = 5, Test = 99 };

/// Independent generator for (seed, tag, keys...). Used so parallel and
/// serial runs draw identical numbers per (gradient, slice).
inline std::mt19937_64 substream(std::uint64_t seed, std::initializer_list<std::uint64_t> keys, StreamTag tag) {
  std::vector<std::uint32_t> words{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                                   static_cast<std::uint32_t>(tag)};
  for (auto k : keys) {
    words.push_back(static_cast<std::uint32_t>(k));
    words.push_back(static_cast<std::uint32_t>(k >> 32));
  }
  std::seed_seq seq(words.begin(), words.end());
  return std::mt19937_64(seq);
}

}  // namespace fodkq
