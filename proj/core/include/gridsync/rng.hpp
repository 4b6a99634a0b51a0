#pragma once

#include <cstdint>

namespace gridsync {

// Counter-based generator: every (seed, stream) pair opens an independent,
// order-free sequence, so Monte Carlo scenarios can be evaluated in any order
// or in parallel and still draw identical numbers.  Core step is the
// splitmix64 finalizer.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream);

    std::uint64_t next_u64();

    // Uniform in [0, 1) with 53-bit resolution.
    double next_double();

    // Uniform in [lo, hi).
    double uniform(double lo, double hi);

private:
    std::uint64_t state_;
};

}  // namespace gridsync
