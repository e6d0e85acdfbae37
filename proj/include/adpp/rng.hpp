#pragma once

#include <cstdint>
#include <random>

namespace adpp {

/// SplitMix64 finalizer; used to derive independent seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Named sub-streams of a run. Each purpose gets its own generator so that,
/// e.g., the state sequence does not depend on how many warmup draws happen.
enum class Stream : std::uint64_t {
    states = 1,
    warmup = 2,
    synthetic = 3,
};

/// Deterministic generator. Output is bit-identical across platforms: the
/// engine is mt19937_64 (fully specified by the standard) and the uniform
/// conversion is done here rather than through std::uniform_*_distribution.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

    /// Seed for run `run` of an ensemble with `master` seed, sub-stream `stream`.
    static std::uint64_t derive_seed(std::uint64_t master, std::uint64_t run, Stream stream) noexcept {
        return splitmix64(splitmix64(master ^ splitmix64(run + 0x632be59bd9b4e019ULL)) +
                          static_cast<std::uint64_t>(stream));
    }

    static Rng for_run(std::uint64_t master, std::uint64_t run, Stream stream) {
        return Rng(derive_seed(master, run, stream));
    }

    std::uint64_t next() { return engine_(); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n). n must be positive.
    std::uint64_t uniform_index(std::uint64_t n);

private:
    std::mt19937_64 engine_;
};

}  // namespace adpp
