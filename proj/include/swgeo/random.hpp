#pragma once

#include <cstdint>
#include <random>

namespace swgeo {

struct RandomSeed {
    std::uint64_t value = 0;
};

// Derives an independent seed for a sub-stream, e.g. (seed, n index, trial).
RandomSeed derive_seed(RandomSeed base, std::uint64_t a, std::uint64_t b = 0);

// Deterministic generator. The standard distributions are implementation
// defined, so the conversions to uniform and normal draws are done here to
// keep streams bit-identical across toolchains.
class Rng {
public:
    explicit Rng(RandomSeed seed) : engine_(seed.value) {}

    // Uniform on [0, 1).
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double normal();
    std::uint64_t bits() { return engine_(); }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace swgeo
