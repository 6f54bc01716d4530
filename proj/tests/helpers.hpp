#pragma once

#include <cstdint>
#include <vector>

#include "evtach/event.hpp"

namespace testutil {

// Deterministic PRNG for test data; keeps expected values stable across
// platforms and standard libraries.
struct Rng {
    std::uint64_t state;

    explicit Rng(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t below(std::uint64_t bound) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next()) * bound) >> 64);
    }

    std::int64_t range(std::int64_t lo, std::int64_t hi) { // inclusive
        return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo + 1)));
    }

    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
};

inline evtach::Event ev(std::uint64_t t, std::uint32_t x, std::uint32_t y, int p) {
    return {t, x, y, static_cast<std::int8_t>(p)};
}

// Random valid stream: sorted timestamps (duplicates allowed), coordinates
// inside the geometry, polarity +-1.
inline evtach::EventStream random_stream(Rng& rng, std::size_t max_events = 200,
                                         std::uint32_t max_dim = 2000) {
    evtach::EventStream s;
    s.geometry.width = static_cast<std::uint32_t>(rng.range(1, max_dim));
    s.geometry.height = static_cast<std::uint32_t>(rng.range(1, max_dim));
    const std::size_t n = static_cast<std::size_t>(rng.below(max_events + 1));
    std::uint64_t t = rng.below(1000);
    s.events.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        t += rng.below(3); // 0 keeps equal timestamps in play
        s.events.push_back(ev(t, static_cast<std::uint32_t>(rng.below(s.geometry.width)),
                              static_cast<std::uint32_t>(rng.below(s.geometry.height)),
                              (rng.next() & 1) ? 1 : -1));
    }
    return s;
}

} // namespace testutil
