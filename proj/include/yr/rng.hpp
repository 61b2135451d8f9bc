#pragma once

#include <cstdint>
#include <random>

namespace yr {

/// Seed lanes keep independent random streams apart (e.g. the β stream of an
/// ensemble never shares state with the initial-condition stream).
enum class SeedLane : std::uint64_t {
  path = 0x70617468,
  beta = 0x62657461,
  perturbation = 0x77707274,
  initial_condition = 0x69636e64,
  field = 0x66696c64,
};

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based seed derivation: the stream for (base, lane, index) is
/// reproducible without generating any of its siblings.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t lane, std::uint64_t index) {
  return mix64(mix64(mix64(base) ^ lane) + index);
}

constexpr std::uint64_t derive_seed(std::uint64_t base, SeedLane lane, std::uint64_t index) {
  return derive_seed(base, static_cast<std::uint64_t>(lane), index);
}

using Engine = std::mt19937_64;

} // namespace yr
