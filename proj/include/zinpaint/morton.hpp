#pragma once

#include <cstddef>
#include <cstdint>

namespace zinpaint {

// True iff the most significant set bit of a is lower than that of b.
// https://en.wikipedia.org/wiki/Z-order_curve
constexpr bool less_most_significant_bit(std::uint8_t a, std::uint8_t b) {
    return (a < b) && (a < (a ^ b));
}

// Compares two D-dimensional byte points by their position on the z-curve
// (bits interleaved most-significant level first, dimension 0 first within
// each level) without materializing the interleaved address: track the
// dimension whose XOR carries the highest set bit, then compare there.
inline bool morton_less(const std::uint8_t* a, const std::uint8_t* b, std::size_t dims) {
    std::uint8_t best_diff = 0;
    std::size_t best_dim = 0;
    for (std::size_t dim = 0; dim < dims; ++dim) {
        const std::uint8_t diff = static_cast<std::uint8_t>(a[dim] ^ b[dim]);
        if (less_most_significant_bit(best_diff, diff)) {
            best_diff = diff;
            best_dim = dim;
        }
    }
    return a[best_dim] < b[best_dim];
}

}  // namespace zinpaint
