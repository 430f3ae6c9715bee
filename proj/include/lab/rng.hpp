#pragma once

#include <cstdint>
#include <string_view>

namespace lab {

// Counter-based generator: the i-th variate of a stream is a pure function of
// (seed, i), so a stream is reproducible regardless of how calls interleave
// with other streams. The output function is the splitmix64 finalizer over
// seed + (i+1)*golden, which is the standard splitmix64 sequence.
inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

constexpr std::uint64_t mix64(std::uint64_t x) {
    x ^= x >> 30;
    x *= 0xBF58476D1CE4E5B9ull;
    x ^= x >> 27;
    x *= 0x94D049BB133111EBull;
    x ^= x >> 31;
    return x;
}

constexpr std::uint64_t counter_value(std::uint64_t seed, std::uint64_t counter) {
    return mix64(seed + (counter + 1) * kGolden);
}

// Child stream seeds. Streams derived with distinct tags are independent for
// all practical purposes.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
    return mix64(mix64(seed ^ 0xA5A5A5A55A5A5A5Aull) + (tag + 1) * kGolden);
}

constexpr std::uint64_t hash_label(std::string_view label) {
    std::uint64_t h = 0xCBF29CE484222325ull;  // FNV-1a
    for (char c : label) {
        h ^= static_cast<std::uint64_t>(static_cast<unsigned char>(c));
        h *= 0x100000001B3ull;
    }
    return h;
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::string_view label) {
    return derive_seed(seed, hash_label(label));
}

class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t next_u64() { return counter_value(seed_, counter_++); }

    // Uniform in [0, 1), 53 mantissa bits.
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in [-1, 1).
    double next_symmetric() { return 2.0 * next_unit() - 1.0; }

    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_;
    std::uint64_t counter_ = 0;
};

}  // namespace lab
