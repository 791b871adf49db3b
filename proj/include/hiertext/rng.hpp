#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <utility>

namespace hiertext {

/// 64-bit FNV-1a. Used both for feature hashing and for labelled seed
/// derivation, so its constants must never change.
struct Fnv1a64 {
    static constexpr std::uint64_t offset_basis = 0xcbf29ce484222325ULL;
    static constexpr std::uint64_t prime = 0x100000001b3ULL;

    std::uint64_t state = offset_basis;

    constexpr void update(std::uint8_t byte) noexcept {
        state ^= byte;
        state *= prime;
    }
    constexpr void update(std::string_view bytes) noexcept {
        for (char c : bytes) update(static_cast<std::uint8_t>(c));
    }
    constexpr std::uint64_t digest() const noexcept { return state; }
};

constexpr std::uint64_t fnv1a64(std::string_view bytes) noexcept {
    Fnv1a64 h;
    h.update(bytes);
    return h.digest();
}

/// SplitMix64 (Steele, Lea, Flood). The output sequence is fully specified,
/// which keeps shuffles identical across platforms and standard libraries.
class SplitMix64 {
public:
    using result_type = std::uint64_t;

    explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return ~result_type{0}; }

    constexpr result_type operator()() noexcept {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform integer in [0, bound) by rejection; bound must be > 0.
    constexpr std::uint64_t bounded(std::uint64_t bound) noexcept {
        const std::uint64_t limit = max() - (max() % bound + 1) % bound;
        std::uint64_t x;
        do {
            x = (*this)();
        } while (x > limit);
        return x % bound;
    }

    /// Uniform double in [0, 1) from the top 53 bits.
    constexpr double uniform() noexcept {
        return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
    }

private:
    std::uint64_t state_;
};

/// Seed for a named component, derived from the run seed. Adding a new
/// label never perturbs the seeds of existing ones.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::string_view label) noexcept {
    SplitMix64 mix(seed ^ fnv1a64(label));
    return mix();
}

/// Fisher-Yates, back to front, drawing j from [0, i].
template <typename T>
void shuffle(std::span<T> items, SplitMix64& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng.bounded(i));
        using std::swap;
        swap(items[i - 1], items[j]);
    }
}

} // namespace hiertext
