#ifndef GFD_RNG_HPP
#define GFD_RNG_HPP

#include <cstdint>
#include <cmath>

#include "gfd/math.hpp"

namespace gfd {

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t& s) {
    std::uint64_t z = (s += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}
} // namespace detail

/// Deterministic random stream keyed by (seed, replication, retry).
///
/// The state is a pure function of the key, so replications can run on any
/// worker in any order and still produce identical draws. xoshiro256++ core,
/// seeded through splitmix64.
class Stream {
public:
    explicit Stream(std::uint64_t seed, std::uint64_t replication = 0,
                    std::uint64_t retry = 0) {
        std::uint64_t key = seed;
        key = mix(key, 0x8000000000000001ULL + replication);
        key = mix(key, 0x4000000000000003ULL + retry);
        std::uint64_t sm = key;
        for (auto& w : s_) w = detail::splitmix64(sm);
        if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;  // all-zero state is invalid
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

    /// Uniform on [0,1) with 53 random bits.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform on the open interval (0,1); safe for inverse-cdf transforms.
    double uniform_open01() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    double normal() { return normal_quantile(uniform_open01()); }

    double exponential() { return -std::log(uniform_open01()); }

    /// Gamma(shape, 1) via Marsaglia-Tsang squeeze.
    double gamma(double shape) {
        if (shape < 1.0) {
            const double u = uniform_open01();
            return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double z, v;
            do {
                z = normal();
                v = 1.0 + c * z;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform_open01();
            if (u < 1.0 - 0.0331 * z * z * z * z) return d * v;
            if (std::log(u) < 0.5 * z * z + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    double chi_squared(double dof) { return 2.0 * gamma(0.5 * dof); }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }
    static std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
        std::uint64_t s = a ^ (b * 0x9E3779B97F4A7C15ULL);
        return detail::splitmix64(s);
    }

    std::uint64_t s_[4];
};

} // namespace gfd

#endif
