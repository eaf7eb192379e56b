#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace gasrl {

// Deterministic random stream: xoshiro256++ seeded via splitmix64.
//
// Every consumer derives its own named stream from the master seed
// (e.g. "data", "init", "explore", "replay", "iqn"), so adding draws to
// one consumer never perturbs the others. Distributions are implemented
// here rather than with <random> so that byte-identical outputs do not
// depend on the standard library version.
class Rng {
public:
    explicit Rng(std::uint64_t seed) { reseed(seed); }

    Rng(std::uint64_t master_seed, std::string_view stream_name)
        : Rng(master_seed ^ fnv1a(stream_name)) {}

    // Sub-stream for run k of a sweep, etc.
    Rng fork(std::uint64_t index) const {
        return Rng(splitmix(seed_base_ + 0x9E3779B97F4A7C15ULL * (index + 1)));
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

    // Uniform double in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n). Rejection-free modulo bias is negligible
    // for the n used here (n << 2^64), but use Lemire reduction anyway.
    std::uint64_t uniform_int(std::uint64_t n) {
        __uint128_t m = static_cast<__uint128_t>(next_u64()) * n;
        return static_cast<std::uint64_t>(m >> 64);
    }

    // Standard normal via Marsaglia polar method.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double mul = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * mul;
        has_spare_ = true;
        return u * mul;
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    static std::uint64_t fnv1a(std::string_view s) {
        std::uint64_t h = 0xCBF29CE484222325ULL;
        for (const char c : s) {
            h ^= static_cast<std::uint8_t>(c);
            h *= 0x100000001B3ULL;
        }
        return h;
    }

private:
    void reseed(std::uint64_t seed) {
        seed_base_ = seed;
        std::uint64_t x = seed;
        for (auto& s : s_) s = (x = splitmix(x));
        has_spare_ = false;
    }

    static std::uint64_t splitmix(std::uint64_t x) {
        x += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = x;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t seed_base_ = 0;
    std::uint64_t s_[4] = {};
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace gasrl
