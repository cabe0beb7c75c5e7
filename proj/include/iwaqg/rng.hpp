// SPDX-License-Identifier: Apache-2.0
//
// Seeded random source. The engine is std::mt19937_64, whose output sequence
// is fixed by the standard; the distributions are written out here because the
// standard library ones are implementation-defined.

#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace iwaqg {

std::uint64_t splitmix64(std::uint64_t x);

class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

    std::uint64_t seed() const { return seed_; }
    std::uint64_t next() { return engine_(); }
    // Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    // Uniform integer in [0, n); n must be positive.
    std::size_t below(std::size_t n);
    double normal();

    // Independent stream derived from this generator's seed, not its state.
    Rng split(std::uint64_t stream) const { return Rng(splitmix64(seed_ ^ splitmix64(stream + 0x9e3779b97f4a7c15ULL))); }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

}  // namespace iwaqg
