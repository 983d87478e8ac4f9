#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <utility>

namespace csk {

// SplitMix64 step, used to mix seed-path components into substream seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Deterministic substream seed: the same (master, path) always yields the
// same value, independent of call order or thread assignment.
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
    std::uint64_t s = master;
    std::uint64_t h = splitmix64(s);
    for (std::uint64_t p : path) {
        s ^= p + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        h ^= splitmix64(s);
    }
    return h;
}

inline std::mt19937_64 derive_stream(std::uint64_t master,
                                     std::initializer_list<std::uint64_t> path) {
    return std::mt19937_64(derive_seed(master, path));
}

// Unit-variance Gaussian draw stream.
class NoiseSource {
  public:
    explicit NoiseSource(std::mt19937_64 rng) : rng_(std::move(rng)) {}
    NoiseSource(std::uint64_t master, std::initializer_list<std::uint64_t> path)
        : rng_(derive_stream(master, path)) {}

    double gaussian() { return normal_(rng_); }
    std::mt19937_64& engine() { return rng_; }

  private:
    std::mt19937_64 rng_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace csk
