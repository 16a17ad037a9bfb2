#pragma once

#include <cstdint>
#include <random>

namespace ergochron {

/// SplitMix64 output finalizer (Stafford variant 13). A bijection on 64-bit
/// words with full avalanche.
constexpr std::uint64_t mix64(std::uint64_t z)
{
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

/// Counter-based seed for realization `index` of a run keyed by `master`.
///
/// seed = mix64(mix64(master ^ 0x6a09e667f3bcc909) + 0x9e3779b97f4a7c15 * (index + 1)).
/// For a fixed master the map index -> seed is injective: the golden-ratio
/// increment is odd and mix64 is a bijection.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

/// Random source used by every stochastic routine. Uses mt19937_64 (whose
/// output sequence is fixed by the standard) and converts bits to variates
/// explicitly, so draws are identical across standard library vendors.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t bits() { return engine_(); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Standard normal via the Box-Muller transform.
    double normal();

  private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace ergochron
