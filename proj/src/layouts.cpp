#include "zinpaint/layouts.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace zinpaint {

int subset_pixel_count(int patch_size, double coverage) {
    return static_cast<int>(std::llround(coverage * patch_size * patch_size));
}

std::array<subset_layout, 8> build_subset_layouts(int patch_size, double coverage) {
    if (patch_size < 3 || patch_size % 2 == 0)
        throw std::invalid_argument("subset layouts: K must be odd and >= 3");
    if (!(coverage > 0.0 && coverage <= 1.0))
        throw std::invalid_argument("subset layouts: coverage must be in (0, 1]");
    const int count = subset_pixel_count(patch_size, coverage);
    if (count < 1) throw std::invalid_argument("subset layouts: coverage keeps no pixels");

    const int k = patch_size;
    const int mid = (k - 1) / 2;
    const std::array<std::pair<int, int>, 8> anchors{{
        {0, mid},          // N edge
        {mid, k - 1},      // E edge
        {k - 1, mid},      // S edge
        {mid, 0},          // W edge
        {0, 0},            // NW corner
        {0, k - 1},        // NE corner
        {k - 1, 0},        // SW corner
        {k - 1, k - 1},    // SE corner
    }};

    std::array<subset_layout, 8> layouts;
    std::vector<std::pair<int, int>> offsets;
    offsets.reserve(static_cast<std::size_t>(k) * k);
    for (int r = 0; r < k; ++r)
        for (int c = 0; c < k; ++c) offsets.emplace_back(r, c);

    for (std::uint32_t id = 0; id < 8; ++id) {
        const auto [ar, ac] = anchors[id];
        auto by_distance = offsets;
        std::stable_sort(by_distance.begin(), by_distance.end(),
                         [&](const auto& a, const auto& b) {
                             const int da = (a.first - ar) * (a.first - ar) +
                                            (a.second - ac) * (a.second - ac);
                             const int db = (b.first - ar) * (b.first - ar) +
                                            (b.second - ac) * (b.second - ac);
                             return da < db;  // stable: distance ties stay row-major
                         });
        by_distance.resize(static_cast<std::size_t>(count));
        std::sort(by_distance.begin(), by_distance.end());

        layouts[id].id = id;
        layouts[id].patch_size = k;
        layouts[id].anchor = anchors[id];
        layouts[id].pixels = std::move(by_distance);
    }
    return layouts;
}

}  // namespace zinpaint
