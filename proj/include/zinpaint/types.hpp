#pragma once

#include <cstdint>

namespace zinpaint {

enum class norm_kind : std::uint8_t { l2, l1 };

// Top-left corner of a K x K patch. Row-major ordering (y, then x) is the
// tie-break used everywhere results must be deterministic.
struct patch_key {
    std::uint16_t x = 0;
    std::uint16_t y = 0;

    constexpr std::uint32_t packed() const {
        return (static_cast<std::uint32_t>(y) << 16) | x;
    }
    friend constexpr bool operator==(patch_key a, patch_key b) {
        return a.x == b.x && a.y == b.y;
    }
    friend constexpr bool operator<(patch_key a, patch_key b) {
        return a.packed() < b.packed();
    }
};

// (distance, key) packed so that integer order equals lexicographic order on
// (distance, row-major key). Distances are integral in both norms: L2 is kept
// squared, L1 is a plain sum, both bounded well below 2^32.
constexpr std::uint64_t pack_candidate(std::uint32_t distance, patch_key key) {
    return (static_cast<std::uint64_t>(distance) << 32) | key.packed();
}

constexpr std::uint32_t packed_distance(std::uint64_t candidate) {
    return static_cast<std::uint32_t>(candidate >> 32);
}

constexpr patch_key packed_key(std::uint64_t candidate) {
    return patch_key{static_cast<std::uint16_t>(candidate & 0xffff),
                     static_cast<std::uint16_t>((candidate >> 16) & 0xffff)};
}

}  // namespace zinpaint
