#pragma once

// Counter-based random streams.  Every draw is a pure function of the
// (seed, tag, key...) tuple that produced it, so samples are reproducible,
// order-independent and safe to generate in parallel.  Window extension is
// free: the color at a site depends only on the seed and the site itself.

#include <cstdint>
#include <type_traits>
#include <vector>

namespace quasitile {

inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x ^= x >> 30;
    x *= 0xBF58476D1CE4E5B9ull;
    x ^= x >> 27;
    x *= 0x94D049BB133111EBull;
    x ^= x >> 31;
    return x;
}

// Accumulates a key from 64-bit words; the final state is the counter
// fed to the output mix.
struct KeyedStream {
    std::uint64_t state = 0x6A09E667F3BCC909ull;

    explicit KeyedStream(std::uint64_t seed = 0) { absorb(seed); }

    template <typename T>
    KeyedStream& absorb(T v) {
        static_assert(std::is_integral_v<T>, "absorb takes integers");
        state = mix64(state ^ mix64(static_cast<std::uint64_t>(static_cast<std::int64_t>(v)) +
                                    0x9E3779B97F4A7C15ull));
        return *this;
    }

    template <typename T>
    KeyedStream& absorb_all(const std::vector<T>& vs) {
        absorb(static_cast<std::uint64_t>(vs.size()));
        for (const T& v : vs) absorb(static_cast<std::uint64_t>(v));
        return *this;
    }

    std::uint64_t bits() const { return mix64(state ^ 0xD1B54A32D192ED03ull); }

    // uniform in [0,1), 53 significant bits
    double uniform01() const { return static_cast<double>(bits() >> 11) * 0x1.0p-53; }
};

// Sequential generator for test drivers and shuffles (SplitMix64).
struct SeqRng {
    std::uint64_t s;
    explicit SeqRng(std::uint64_t seed) : s(seed) {}

    std::uint64_t next() {
        s += 0x9E3779B97F4A7C15ull;
        return mix64(s);
    }
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    // unbiased enough for test-scale n
    std::uint64_t below(std::uint64_t n) { return next() % n; }
    std::int64_t range(std::int64_t lo, std::int64_t hi) { // inclusive
        return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo + 1)));
    }
};

} // namespace quasitile
