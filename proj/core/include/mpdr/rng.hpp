#pragma once

#include <cstdint>

namespace mpdr {

/// Counter-free xoshiro256++ generator with splitmix64 seeding.
///
/// All distributions are implemented from the raw 64-bit stream so that a
/// seed produces bit-identical draws on every platform and toolchain. The
/// normal draw uses Box-Muller without caching the second variate; copies of
/// an Rng therefore behave identically to the original from the copy point.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next_u64();

    /// Uniform in [0, 1).
    double uniform();
    /// Uniform in [lo, hi).
    double uniform(double lo, double hi);
    /// Standard normal.
    double normal();
    /// Uniform integer in [0, n). n must be positive.
    std::uint64_t uniform_index(std::uint64_t n);

    /// Derive an independent deterministic stream. Calling split with the
    /// same key on an Rng constructed with the same seed always yields the
    /// same stream; the parent is not advanced.
    Rng split(std::uint64_t key) const;

    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_;
    std::uint64_t s_[4];
};

} // namespace mpdr
