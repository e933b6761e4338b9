#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace lsngc {

/// Deterministic stream RNG. Every random draw in the library flows from a
/// 64-bit root seed through derive_stream(seed, label, index), so results do
/// not depend on the order in which components consume randomness (or on
/// which thread runs them). The generator itself is SplitMix64: portable,
/// stateless to seed, and plenty good for clustering inits and simulations.
class Rng {
  public:
    explicit Rng(std::uint64_t state) : state_(state) {}

    std::uint64_t next_u64();

    /// Uniform in [0, 1) with 53 random bits.
    double next_double();

    /// Uniform integer in [0, n), n > 0. Rejection sampled, bias-free.
    std::uint64_t next_below(std::uint64_t n);

    /// Standard normal via Box-Muller (the spare is cached).
    double next_gaussian();

    /// In-place Fisher-Yates shuffle of indices 0..n-1.
    std::vector<std::size_t> permutation(std::size_t n);

  private:
    std::uint64_t state_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// Folds (seed, label, index) into a stream state. Same inputs, same stream.
std::uint64_t derive_stream(std::uint64_t seed, std::string_view label, std::uint64_t index = 0);

inline Rng make_rng(std::uint64_t seed, std::string_view label, std::uint64_t index = 0) {
    return Rng(derive_stream(seed, label, index));
}

} // namespace lsngc
