#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace ousynth {

/// splitmix64 finalizer; bijective on 64-bit integers.
uint64_t mix64(uint64_t x) noexcept;

/// Seed of stream k derived from a base seed:
///   derive_seed(base, k) = mix64(base + (k+1) * 0x9E3779B97F4A7C15)
/// Used for trace streams, per-stock streams and rejection redraws.
uint64_t derive_seed(uint64_t base, uint64_t k) noexcept;

/// Inverse standard-normal CDF, Acklam's rational approximation
/// (|relative error| < 1.2e-9 over (0,1)).
double normal_icdf(double p) noexcept;

// Seedable deterministic generator: std::mt19937_64 (algorithm fixed by the
// standard) with normal deviates via normal_icdf. Exactly one engine draw is
// consumed per uniform/normal/index, so streams replay identically across
// platforms and thread counts.
class Rng {
public:
    explicit Rng(uint64_t seed) : engine_(seed) {}

    uint64_t next_u64() { return engine_(); }

    /// Uniform on (0,1) with 53-bit resolution; never exactly 0 or 1.
    double uniform01() {
        return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
    }

    double normal() { return normal_icdf(uniform01()); }

    /// Index into [0, n). Bias is O(n * 2^-53), irrelevant at sample scale.
    std::size_t uniform_index(std::size_t n) {
        return static_cast<std::size_t>(uniform01() * static_cast<double>(n));
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace ousynth
