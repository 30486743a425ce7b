#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace stimkit {

/// Uniform draw in [0, bound) by rejection. std::uniform_int_distribution is
/// implementation-defined, so seeded outputs would not be reproducible across
/// standard libraries; this is, given that mt19937_64 itself is pinned by the
/// standard.
inline std::uint64_t bounded_rand(std::mt19937_64& rng, std::uint64_t bound) {
    if (bound == 0) return 0;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t r;
    do {
        r = rng();
    } while (r >= limit);
    return r % bound;
}

/// Fisher-Yates shuffle with reproducible draws.
template <typename T>
void deterministic_shuffle(std::vector<T>& items, std::mt19937_64& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(bounded_rand(rng, i));
        std::swap(items[i - 1], items[j]);
    }
}

}  // namespace stimkit
