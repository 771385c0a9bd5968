#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace revhelp {

// Deterministic pseudo-random stream. The engine is mt19937_64 (its output
// sequence is fully specified by the standard); all derived draws below are
// computed from raw 64-bit words by this class itself, so identical seeds
// give identical sequences independent of the standard library's
// distribution implementations.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : seed_(seed), engine_(seed) {}

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1) with 53 random mantissa bits.
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform index in [0, n). Lemire multiply-shift; n == 0 returns 0.
    std::size_t index(std::size_t n) {
        if (n == 0) return 0;
        return static_cast<std::size_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    bool bernoulli(double p) { return uniform() < p; }

    // Fisher-Yates, driven by index() so the permutation is reproducible.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = index(i);
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

}  // namespace revhelp
