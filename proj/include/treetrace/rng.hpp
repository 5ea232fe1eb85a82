#pragma once

#include <cstdint>
#include <random>

namespace treetrace {

// All randomness flows through mt19937_64 with an explicit uniform mapping,
// so a fixed seed produces the same draws on every platform (the standard
// pins the engine but not the distribution adapters).
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Seed for sub-stream `stream` of a run seeded with `seed`. Streams are
// handed out by index (one per trace, one per trial, ...) so parallel
// workers can sample them in any order and still reproduce a serial run.
inline std::uint64_t derive_stream_seed(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(splitmix64(seed) ^ splitmix64(stream + 1));
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    static Rng for_stream(std::uint64_t seed, std::uint64_t stream) {
        return Rng(derive_stream_seed(seed, stream));
    }

    std::uint64_t bits() { return engine_(); }

    // Uniform in [0,1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform() < p; }

    // Unbiased integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = ~std::uint64_t{0} - ~std::uint64_t{0} % n;
        std::uint64_t draw;
        do {
            draw = engine_();
        } while (draw >= limit);
        return draw % n;
    }

private:
    std::mt19937_64 engine_;
};

} // namespace treetrace
