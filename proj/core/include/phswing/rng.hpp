#pragma once

#include <cstdint>

namespace phswing {

// Counter-based normal draws: every (seed, path, step, channel) maps to one
// fixed N(0,1) value, so results do not depend on thread scheduling.
std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t path, std::uint64_t step,
                           std::uint64_t channel);
double counter_uniform(std::uint64_t seed, std::uint64_t path, std::uint64_t step,
                       std::uint64_t channel);
double counter_normal(std::uint64_t seed, std::uint64_t path, std::uint64_t step,
                      std::uint64_t channel);

// Channels used by the simulator.
enum NoiseChannel : std::uint64_t { kNoiseC = 0, kNoiseQ = 1, kNoiseH = 2 };

}  // namespace phswing
