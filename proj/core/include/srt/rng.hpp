#pragma once

#include <cstdint>
#include <random>

namespace srt {

// splitmix64 finalizer. Decorrelates seeds that differ in few bits.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Derive a stream seed from a base seed and an arbitrary key path, e.g.
// mix_seed(augment_seed, epoch, iter, 1). Same inputs, same seed; any
// component change gives an unrelated stream.
constexpr std::uint64_t mix_seed(std::uint64_t seed) { return splitmix64(seed); }

template <class... Keys>
constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t key, Keys... rest) {
    return mix_seed(splitmix64(seed ^ splitmix64(key)), rest...);
}

// ---------------------------------------------------------------------------
// RngStream: a seeded mt19937_64 with explicit forking.
//
// fork() consumes one draw from the parent and seeds an independent child.
// Consumers that own a fork never perturb their siblings, which is what the
// reproducibility contracts are built on.
// ---------------------------------------------------------------------------
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : engine_(splitmix64(seed)) {}

    std::uint64_t next_u64() { return engine_(); }

    RngStream fork() { return RngStream(engine_()); }

    // Inclusive bounds.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        std::uniform_int_distribution<std::int64_t> d(lo, hi);
        return d(engine_);
    }

    double uniform_real(double lo, double hi) {
        std::uniform_real_distribution<double> d(lo, hi);
        return d(engine_);
    }

    double normal(double mean = 0.0, double stddev = 1.0) {
        std::normal_distribution<double> d(mean, stddev);
        return d(engine_);
    }

    bool bernoulli(double p) {
        std::bernoulli_distribution d(p);
        return d(engine_);
    }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
};

} // namespace srt
