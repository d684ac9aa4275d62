#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

namespace vbx {

// All randomness in the library flows through this generator so that runs are
// reproducible across platforms and languages. The algorithm is splitmix64
// (Steele, Lea, Flood 2014): a single 64-bit state advanced by the golden
// ratio increment and finalized with two xor-multiply rounds.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1) with 53-bit resolution.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Unbiased uniform integer in [0, n); n must be >= 1.
    std::uint64_t next_below(std::uint64_t n) {
        const std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            const std::uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

    // Standard normal via Box-Muller, cosine branch only. Two uniforms per
    // draw, no cached spare, so the consumed stream length is predictable.
    double next_normal() {
        double u1 = next_double();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        const double u2 = next_double();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
    }

    double next_normal(double mean, double sigma) { return mean + sigma * next_normal(); }

    // In-place Fisher-Yates, iterating from the back.
    template <typename T>
    void shuffle(std::vector<T>& values) {
        for (std::size_t i = values.size(); i > 1; --i) {
            std::swap(values[i - 1], values[next_below(i)]);
        }
    }

private:
    static constexpr double kPi = 3.14159265358979323846;
    std::uint64_t state_;
};

namespace detail {
inline std::uint64_t splitmix_scramble(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

inline std::uint64_t fnv1a(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (const char c : text) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ull;
    }
    return h;
}
} // namespace detail

// Derives an independent substream seed from a master seed and a label.
// Defined as splitmix_scramble(seed ^ fnv1a(label)), then one extra scramble
// per numeric index. Every module documents the labels it uses, so the whole
// pipeline is reproducible from the single master seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view label) {
    return detail::splitmix_scramble(seed ^ detail::fnv1a(label));
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view label, std::uint64_t index) {
    return detail::splitmix_scramble(derive_seed(seed, label) ^ index);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view label, std::uint64_t a,
                                 std::uint64_t b) {
    return detail::splitmix_scramble(derive_seed(seed, label, a) ^ b);
}

} // namespace vbx
