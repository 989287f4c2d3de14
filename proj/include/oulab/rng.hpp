#pragma once

#include <cmath>
#include <cstdint>

// Deterministic per-replication random streams. Each stream is a pure
// function of (master_seed, replication_index), so ensembles are
// reproducible regardless of how replications are distributed over
// worker threads.
namespace oulab {

struct RngStreamSpec {
    std::uint64_t master_seed = 0;
    std::uint64_t replication_index = 0;
};

namespace detail {

inline std::uint64_t mix64(std::uint64_t z) {
    // splitmix64 finalizer (Steele/Lea/Vigna)
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace detail

// xoshiro256++ seeded by splitmix64 from a counter-based mix of the
// stream spec. Normal variates use the Marsaglia polar method.
class ReplicationStream {
public:
    explicit ReplicationStream(const RngStreamSpec& spec) {
        std::uint64_t seed = detail::mix64(spec.master_seed) ^
                             detail::mix64(spec.replication_index * 0xD1B54A32D192ED03ULL + 1);
        for (auto& word : state_) {
            seed += 0x9E3779B97F4A7C15ULL;
            word = detail::mix64(seed);
        }
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // uniform on (0,1), never exactly 0 or 1
    double next_uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    double next_normal() {
        if (has_cached_) {
            has_cached_ = false;
            return cached_;
        }
        double u, v, s;
        do {
            u = 2.0 * next_uniform() - 1.0;
            v = 2.0 * next_uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double m = std::sqrt(-2.0 * std::log(s) / s);
        cached_ = v * m;
        has_cached_ = true;
        return u * m;
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::uint64_t state_[4];
    double cached_ = 0.0;
    bool has_cached_ = false;
};

}  // namespace oulab
