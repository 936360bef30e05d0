#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

#include "f2s/point.hpp"

namespace f2s {

// Deterministic randomness with labeled stream splitting. A stream is keyed
// by a 64-bit value; children derive their key from the parent key and a
// stable label, so nested procedures are reproducible from one root seed and
// independent of execution order. Labels must not encode the ambient
// dimension if meters are to be compared across n.
class RandomSource {
  public:
    explicit RandomSource(uint64_t seed) : key_(seed), eng_(mix(seed ^ 0x6a09e667f3bcc908ull)) {}

    uint64_t key() const { return key_; }

    RandomSource split(std::string_view label) const {
        uint64_t h = 0xcbf29ce484222325ull;  // FNV-1a over the label
        for (char c : label) {
            h ^= static_cast<unsigned char>(c);
            h *= 0x100000001b3ull;
        }
        return RandomSource(mix(key_ ^ mix(h)));
    }

    RandomSource split(uint64_t index) const {
        return RandomSource(mix(key_ ^ mix(index + 0x9e3779b97f4a7c15ull)));
    }

    uint64_t u64() { return eng_(); }

    int bit() { return static_cast<int>(u64() & 1); }

    // Unbiased integer in [0, bound) via masked rejection.
    uint64_t below(uint64_t bound) {
        if (bound == 0) throw std::invalid_argument("RandomSource::below: zero bound");
        if (bound == 1) return 0;
        uint64_t mask = ~0ull >> std::countl_zero(bound - 1);
        for (;;) {
            uint64_t v = u64() & mask;
            if (v < bound) return v;
        }
    }

    double real01() { return static_cast<double>(u64() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return real01() < p; }

    // Uniform point; consumes exactly ceil(n/64) draws (one draw for n <= 64,
    // with the low bits independent of n — pipelines rely on this for
    // cross-dimension meter comparisons).
    Point point(uint32_t n) {
        Point p(n);
        size_t wc = p.word_count();
        for (size_t i = 0; i < wc; ++i) p.set_word(i, u64());
        uint32_t rem = n & 63;
        if (rem != 0) p.set_word(wc - 1, p.word(wc - 1) & ((1ull << rem) - 1));
        return p;
    }

  private:
    static uint64_t mix(uint64_t z) {  // splitmix64 finalizer
        z += 0x9e3779b97f4a7c15ull;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    uint64_t key_;
    std::mt19937_64 eng_;
};

}  // namespace f2s
