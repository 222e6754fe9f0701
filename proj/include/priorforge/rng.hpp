#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace priorforge {

/// SplitMix64 generator. Every stochastic quantity in the project (noise
/// inputs, weight init, k-space noise, validation splits) is drawn from this
/// stream so that results are reproducible across platforms and languages.
///
///   state += 0x9E3779B97F4A7C15
///   z = state
///   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
///   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
///   return z ^ (z >> 31)
///
/// uniform() maps the top 53 bits to [0, 1). normal() uses the Box-Muller
/// cosine branch with one fresh pair of uniforms per sample.
class SplitMix64
{
public:
  explicit SplitMix64(std::uint64_t seed = 0)
    : state_(seed)
  {
  }

  std::uint64_t next()
  {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal()
  {
    double const u1 = 1.0 - uniform(); // (0, 1]
    double const u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : next() % n; }

private:
  std::uint64_t state_;
};

/// Derives an independent stream seed from a base seed and a small tag so
/// that, e.g., network init and noise input never share a stream.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag)
{
  SplitMix64 g(base ^ (tag * 0xD1B54A32D192ED03ULL));
  return g.next();
}

} // namespace priorforge
