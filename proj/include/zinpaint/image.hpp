#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "zinpaint/types.hpp"

namespace zinpaint {

// 8-bit raster, row-major, channel-interleaved. channels is 1 or 3.
struct raster_image {
    int width = 0;
    int height = 0;
    int channels = 1;
    std::vector<std::uint8_t> data;

    raster_image() = default;
    raster_image(int w, int h, int ch, std::uint8_t fill = 0)
        : width(w), height(h), channels(ch),
          data(static_cast<std::size_t>(w) * h * ch, fill) {
        if (w <= 0 || h <= 0 || (ch != 1 && ch != 3))
            throw std::invalid_argument("raster_image: bad dimensions");
    }

    std::size_t offset(int x, int y) const {
        return (static_cast<std::size_t>(y) * width + x) * channels;
    }
    std::uint8_t* pixel(int x, int y) { return data.data() + offset(x, y); }
    const std::uint8_t* pixel(int x, int y) const { return data.data() + offset(x, y); }
    bool in_bounds(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }
};

// Per-pixel known/unknown state paired with a raster of the same dimensions.
struct mask_image {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> known;  // 1 = KNOWN, 0 = UNKNOWN

    mask_image() = default;
    mask_image(int w, int h, bool all_known = true)
        : width(w), height(h), known(static_cast<std::size_t>(w) * h, all_known ? 1 : 0) {
        if (w <= 0 || h <= 0) throw std::invalid_argument("mask_image: bad dimensions");
    }

    std::size_t idx(int x, int y) const { return static_cast<std::size_t>(y) * width + x; }
    bool is_known(int x, int y) const { return known[idx(x, y)] != 0; }
    void set_known(int x, int y, bool v) { known[idx(x, y)] = v ? 1 : 0; }
    bool in_bounds(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }

    std::size_t count_unknown() const {
        std::size_t n = 0;
        for (auto v : known) n += v == 0;
        return n;
    }
};

struct pixel_coord {
    int x = 0;
    int y = 0;
    friend bool operator==(pixel_coord, pixel_coord) = default;
};

// K x K window copied out of an image: per-pixel intensities (channel
// interleaved, patch-local row-major) plus one known flag per pixel. Unknown
// pixels carry value 0; cost logic must consult the flags, never the zeros.
struct patch_view {
    int k = 0;
    int channels = 1;
    std::vector<std::uint8_t> values;  // k*k*channels
    std::vector<std::uint8_t> known;   // k*k

    int known_count() const {
        int n = 0;
        for (auto v : known) n += v != 0;
        return n;
    }
};

// Window centered at `center`, spanning center +- (K-1)/2. Throws when any
// part of the window falls outside the image.
patch_view extract_patch(const raster_image& image, const mask_image& mask, pixel_coord center,
                         int k);

// Same window, but out-of-image pixels are reported as unknown instead of
// throwing. This is what the fill loop uses near the borders.
patch_view extract_patch_clamped(const raster_image& image, const mask_image& mask,
                                 pixel_coord center, int k);

// KNOWN pixels with at least one UNKNOWN 4-neighbor; empty iff the mask is
// fully known. Row-major order.
std::vector<pixel_coord> compute_fillfront(const mask_image& mask);

bool is_fillfront_pixel(const mask_image& mask, int x, int y);

}  // namespace zinpaint
