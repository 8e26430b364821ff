#pragma once

#include <cstdint>
#include <vector>

namespace pcsim {

// Counter-based random streams in the spirit of Salmon et al.'s Random123:
// draw i of stream (seed, id) is a pure function of (seed, id, i), so
// per-prompt streams never perturb each other regardless of sampling order.
// The generator is the SplitMix64 finalizer applied to key + i*gamma.

inline constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ull;

constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

constexpr std::uint64_t stream_key(std::uint64_t seed, std::uint64_t stream_id) {
    std::uint64_t k = mix64(seed + kGoldenGamma);
    return mix64(k ^ (stream_id * kGoldenGamma + 0x94d049bb133111ebull));
}

class Stream {
public:
    Stream() = default;
    Stream(std::uint64_t seed, std::uint64_t stream_id)
        : key_(stream_key(seed, stream_id)) {}

    std::uint64_t next_u64() { return mix64(key_ + (++counter_) * kGoldenGamma); }

    /// Uniform double in [0, 1).
    double next_unit() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    bool next_bernoulli(double p) { return next_unit() < p; }

    /// Uniform integer in [0, bound) via rejection; bound must be > 0.
    std::uint64_t next_below(std::uint64_t bound) {
        const std::uint64_t threshold = -bound % bound;
        for (;;) {
            std::uint64_t r = next_u64();
            if (r >= threshold) return r % bound;
        }
    }

    std::uint64_t draws() const { return counter_; }

private:
    std::uint64_t key_ = 0;
    std::uint64_t counter_ = 0;
};

/// In-place Fisher-Yates shuffle driven by `stream`.
template <typename T>
void shuffle(std::vector<T>& values, Stream& stream) {
    for (std::size_t i = values.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(stream.next_below(i));
        std::swap(values[i - 1], values[j]);
    }
}

}  // namespace pcsim
