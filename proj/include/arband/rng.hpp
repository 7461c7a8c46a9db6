#pragma once

#include <cmath>
#include <cstdint>

namespace arband {

// splitmix64 finalizer; bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
}

// Derives a decorrelated child seed. For a fixed parent seed the map
// index -> seed is injective (odd multiplier, bijective finalizer), so
// per-index streams within one experiment never alias each other.
constexpr std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t index) noexcept {
    return mix64(seed + 0xD1B54A32D192ED03ULL * (index + 1));
}

constexpr std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t a,
                                      std::uint64_t b) noexcept {
    return derive_stream(derive_stream(seed, a), b);
}

// Minimal counter-style generator (splitmix64). Byte-for-byte reproducible
// across platforms for a fixed seed; cheap to seed per repetition.
class counter_rng {
public:
    explicit counter_rng(std::uint64_t seed) noexcept : state_(seed) {}

    std::uint64_t next_u64() noexcept {
        state_ += 0x9E3779B97F4A7C15ULL;
        return mix64(state_);
    }

    // Uniform on the open interval (0,1); 53 significant bits.
    double next_unit() noexcept {
        const double v = static_cast<double>(next_u64() >> 11) + 0.5;
        return v * (1.0 / 9007199254740992.0);  // 2^-53
    }

    // Standard normal via Box-Muller; second deviate of each pair is cached.
    double next_normal() noexcept {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = next_unit();
        const double u2 = next_unit();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double t = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(t);
        has_spare_ = true;
        return r * std::cos(t);
    }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace arband
