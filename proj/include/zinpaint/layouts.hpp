#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

namespace zinpaint {

// One of the eight fixed pixel subsets of a K x K patch. Four are anchored at
// edge midpoints, four at corners; each keeps the round(c*K^2) offsets
// nearest its anchor so that together they approximate any ad-hoc known-pixel
// subset a partially filled patch can present.
struct subset_layout {
    std::uint32_t id = 0;
    int patch_size = 0;                            // K
    std::pair<int, int> anchor{0, 0};              // (row, col)
    std::vector<std::pair<int, int>> pixels;       // (row, col), row-major order

    bool covers(int row, int col) const {
        for (const auto& p : pixels)
            if (p.first == row && p.second == col) return true;
        return false;
    }
};

// round(c * K^2), half away from zero.
int subset_pixel_count(int patch_size, double coverage);

// Layouts 0..3 anchor at the N/E/S/W edge midpoints, 4..7 at the NW/NE/SW/SE
// corners. Distance ties are broken in row-major offset order.
std::array<subset_layout, 8> build_subset_layouts(int patch_size, double coverage);

}  // namespace zinpaint
