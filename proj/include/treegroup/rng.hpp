#pragma once

#include <cstdint>

#include "treegroup/errors.hpp"

namespace treegroup {

// Seed plus substream index. Every experiment derives one engine per sample
// from (seed, stream, sample index), so reports are reproducible bit for bit
// regardless of thread count or platform.
struct RngConfig {
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
};

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Stateless 64-bit mixer (a bijection), used to fold seed, stream and sample
// index into one engine seed.
inline std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 33;
    z *= 0xff51afd7ed558ccdULL;
    z ^= z >> 33;
    z *= 0xc4ceb9fe1a85ec53ULL;
    z ^= z >> 33;
    return z;
}

inline std::uint64_t derive_seed(const RngConfig& cfg, std::uint64_t index) {
    std::uint64_t h = mix64(cfg.seed ^ 0x6a09e667f3bcc908ULL);
    h = mix64(h + 0x9e3779b97f4a7c15ULL * (cfg.stream + 1));
    h = mix64(h + 0x9e3779b97f4a7c15ULL * (index + 1));
    return h;
}

// xoshiro256** with splitmix64 seeding. Self-contained so that draws do not
// depend on any library's distribution implementation.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& w : s_) w = splitmix64_next(sm);
    }
    Rng(const RngConfig& cfg, std::uint64_t index) : Rng(derive_seed(cfg, index)) {}

    std::uint64_t next() {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Unbiased integer in [0, n) by rejection.
    std::uint64_t uniform_below(std::uint64_t n) {
        if (n == 0) throw domain_error("uniform_below: empty range");
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n + 1) % n;
        std::uint64_t r = next();
        while (r > limit) r = next();
        return r % n;
    }

    int uniform_int(int n) { return static_cast<int>(uniform_below(static_cast<std::uint64_t>(n))); }

    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Exact Bernoulli(num/den).
    bool bernoulli(std::uint64_t num, std::uint64_t den) {
        return uniform_below(den) < num;
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }
    std::uint64_t s_[4];
};

} // namespace treegroup
