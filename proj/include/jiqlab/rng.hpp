#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace jiqlab {

// SplitMix64 finalizer; used to derive independent stream seeds from one master seed.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t hash_name(std::string_view name) {
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
    for (char c : name) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

// A named, seeded random stream. Satisfies UniformRandomBitGenerator so it can
// drive the <random> distributions directly.
class RngStream {
public:
    using result_type = std::mt19937_64::result_type;

    RngStream(std::uint64_t master_seed, std::string_view name)
        : engine_(splitmix64(splitmix64(master_seed) ^ hash_name(name))) {}

    explicit RngStream(std::uint64_t seed) : engine_(splitmix64(seed)) {}

    static constexpr result_type min() { return std::mt19937_64::min(); }
    static constexpr result_type max() { return std::mt19937_64::max(); }
    result_type operator()() { return engine_(); }

    // Uniform on (0, 1]; never returns 0, so log() and pow(u, -a) are safe.
    double uniform_open0() {
        return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
    }

    // Uniform on [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(engine_);
    }

private:
    std::mt19937_64 engine_;
};

// The three per-scenario streams: arrivals, service sizes, routing.
struct ScenarioStreams {
    RngStream arrivals;
    RngStream service;
    RngStream routing;

    explicit ScenarioStreams(std::uint64_t master_seed)
        : arrivals(master_seed, "arrivals"),
          service(master_seed, "service"),
          routing(master_seed, "routing") {}
};

}  // namespace jiqlab
