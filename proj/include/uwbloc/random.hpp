#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace uwbloc {

/// SplitMix64 finalizer; used to derive independent stream seeds from indices.
constexpr std::uint64_t mix64(std::uint64_t z)
{
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seeded random stream. Each Monte-Carlo task owns one; streams for (seed, i, j, ...)
/// are derived by hashing so results never depend on execution order.
class RandomStream
{
public:
  explicit RandomStream(std::uint64_t seed = 0) : engine_(mix64(seed)) {}

  static RandomStream derive(std::uint64_t seed, std::initializer_list<std::uint64_t> path)
  {
    std::uint64_t s = mix64(seed);
    for (std::uint64_t p : path) s = mix64(s ^ mix64(p + 0x632be59bd9b4e019ULL));
    return RandomStream(s);
  }

  double normal(double sigma = 1.0)
  {
    // Always consumes a draw so streams stay aligned across noise levels.
    return sigma * std::normal_distribution<double>(0.0, 1.0)(engine_);
  }
  double uniform(double lo = 0.0, double hi = 1.0)
  {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  bool bernoulli(double p) { return uniform() < p; }

  std::mt19937_64& engine() { return engine_; }

private:
  std::mt19937_64 engine_;
};

}  // namespace uwbloc
