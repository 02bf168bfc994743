#pragma once

// Independent reference implementations used to check the fast paths. These
// deliberately avoid the library's shortcuts: the z-order comparator is
// evaluated on fully interleaved addresses, knn by a plain linear scan.

#include <algorithm>
#include <cstdint>
#include <vector>

#include "zinpaint/types.hpp"
#include "zinpaint/zcurve.hpp"

namespace oracle {

inline int msb_index(unsigned v) {
    int idx = -1;
    while (v) {
        ++idx;
        v >>= 1;
    }
    return idx;
}

// floor(log2(a)) < floor(log2(b)), a = 0 counting as -inf unless b = 0 too.
inline bool less_msb(std::uint8_t a, std::uint8_t b) {
    return msb_index(a) < msb_index(b);
}

// Explicit bit interleaving: level 7 down to 0, dimension 0 first within each
// level. Returns the interleaved address as a bit vector, most significant
// bit first.
inline std::vector<int> z_address(const std::uint8_t* p, std::size_t dims) {
    std::vector<int> bits;
    bits.reserve(dims * 8);
    for (int level = 7; level >= 0; --level)
        for (std::size_t d = 0; d < dims; ++d) bits.push_back((p[d] >> level) & 1);
    return bits;
}

inline bool morton_less(const std::uint8_t* a, const std::uint8_t* b, std::size_t dims) {
    return z_address(a, dims) < z_address(b, dims);
}

// z-address as an integer for small dimension/bit-width instances.
inline std::uint64_t z_value(const std::uint8_t* p, std::size_t dims, int bits_per_dim) {
    std::uint64_t z = 0;
    for (int level = bits_per_dim - 1; level >= 0; --level)
        for (std::size_t d = 0; d < dims; ++d) z = (z << 1) | ((p[d] >> level) & 1);
    return z;
}

// Exact knn by linear scan with the library's tie-break: ascending packed
// (distance, row-major key).
inline std::vector<zinpaint::knn_entry> linear_knn(const zinpaint::zcurve_index& index,
                                                   const std::uint8_t* query, std::size_t k,
                                                   zinpaint::norm_kind norm) {
    std::vector<std::uint64_t> packed;
    packed.reserve(index.size());
    for (std::size_t i = 0; i < index.size(); ++i) {
        const std::uint32_t d =
            zinpaint::point_distance(query, index.coords_at(i), index.dims(), norm);
        packed.push_back(zinpaint::pack_candidate(d, index.key_at(i)));
    }
    const std::size_t keep = std::min(k, packed.size());
    std::partial_sort(packed.begin(), packed.begin() + static_cast<std::ptrdiff_t>(keep),
                      packed.end());
    packed.resize(keep);
    std::vector<zinpaint::knn_entry> out;
    out.reserve(keep);
    for (std::uint64_t c : packed)
        out.push_back({zinpaint::packed_distance(c), zinpaint::packed_key(c)});
    return out;
}

}  // namespace oracle
