#pragma once

#include <cstdint>
#include <cmath>

namespace ekh {

// Counter-based random generator. Every draw is a pure function of
// (seed, stream, counter), so realizations are reproducible regardless of
// evaluation order or thread schedule. Stream-splitting convention:
//   stream = lattice site index / Poisson point index / named constant,
// one substream per independent random object.
//
// The mixer is the splitmix64 finalizer applied in two keyed rounds;
// statistical quality is ample for geometry sampling.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream)
        : key_(mix(seed + 0x9E3779B97F4A7C15ull * (stream + 1))), counter_(0) {}

    std::uint64_t next_u64() { return at(counter_++); }

    // Value of draw `i` of this (seed, stream) pair, independent of history.
    std::uint64_t at(std::uint64_t i) const { return mix(key_ + 0xBF58476D1CE4E5B9ull * (i + 1)); }

    // Uniform in [0,1) with 53-bit resolution.
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in [a,b).
    double next_uniform(double a, double b) { return a + (b - a) * next_unit(); }

    // Bernoulli draw with success probability p.
    bool next_bernoulli(double p) { return next_unit() < p; }

    // Poisson count with mean lambda, by summing exponential spacings
    // in log space (stable for any lambda, O(lambda) draws).
    std::uint64_t next_poisson(double lambda) {
        if (lambda <= 0.0) return 0;
        std::uint64_t k = 0;
        double s = 0.0;
        for (;;) {
            double u = next_unit();
            if (u <= 0.0) u = 0x1.0p-53;
            s += -std::log(u);
            if (s >= lambda) return k;
            ++k;
        }
    }

    static std::uint64_t mix(std::uint64_t x) {
        x += 0x9E3779B97F4A7C15ull;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
        return x ^ (x >> 31);
    }

private:
    std::uint64_t key_;
    std::uint64_t counter_;
};

} // namespace ekh
