#include "phswing/rng.hpp"

#include <cmath>
#include <numbers>

namespace phswing {

namespace {

std::uint64_t splitmix(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

double to_unit(std::uint64_t bits)
{
    // 53 random bits mapped to (0, 1)
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace

std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t path, std::uint64_t step,
                           std::uint64_t channel)
{
    std::uint64_t h = splitmix(seed);
    h = splitmix(h ^ path);
    h = splitmix(h ^ step);
    return splitmix(h ^ channel);
}

double counter_uniform(std::uint64_t seed, std::uint64_t path, std::uint64_t step,
                       std::uint64_t channel)
{
    return to_unit(counter_hash(seed, path, step, channel));
}

double counter_normal(std::uint64_t seed, std::uint64_t path, std::uint64_t step,
                      std::uint64_t channel)
{
    std::uint64_t bits = counter_hash(seed, path, step, channel);
    double u1 = to_unit(bits);
    double u2 = to_unit(splitmix(bits ^ 0x5851f42d4c957f2dULL));
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace phswing
