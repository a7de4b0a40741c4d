#pragma once

#include <cstdint>
#include <cmath>

namespace subsel {

// SplitMix64, used for seeding and for deriving independent stream seeds.
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// xoshiro256++ with Box-Muller normals. Streams derived from (seed, stream id)
// are independent for practical purposes; replicate loops hand each replicate
// its own stream so runs parallelize without losing reproducibility.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& w : s_) w = splitmix64_next(sm);
    }

    // Deterministic child stream; never advances this generator.
    static Rng stream(std::uint64_t seed, std::uint64_t id) {
        std::uint64_t sm = seed;
        std::uint64_t a = splitmix64_next(sm);
        sm = a ^ (id * 0x9e3779b97f4a7c15ULL + 0x853c49e6748fea9bULL);
        return Rng(splitmix64_next(sm));
    }
    static Rng stream(std::uint64_t seed, std::uint64_t id1, std::uint64_t id2) {
        std::uint64_t sm = seed ^ (id1 * 0xd1342543de82ef95ULL);
        std::uint64_t a = splitmix64_next(sm);
        sm = a ^ (id2 * 0x9e3779b97f4a7c15ULL + 0x853c49e6748fea9bULL);
        return Rng(splitmix64_next(sm));
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform on [0,1) with 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    bool bernoulli(double p) { return uniform() < p; }

    // 0-based index uniform on {0,...,m-1}.
    std::uint64_t uniform_index(std::uint64_t m) {
        // Rejection to remove modulo bias.
        const std::uint64_t lim = UINT64_MAX - UINT64_MAX % m;
        std::uint64_t v;
        do { v = next_u64(); } while (v >= lim);
        return v % m;
    }

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 6.283185307179586476925286766559 * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

    double normal(double mean, double sd) { return mean + sd * normal(); }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t s_[4]{};
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace subsel
