#include "zinpaint/image.hpp"

namespace zinpaint {

namespace {

patch_view extract_impl(const raster_image& image, const mask_image& mask, pixel_coord center,
                        int k, bool clamped) {
    if (k < 3 || k % 2 == 0) throw std::invalid_argument("extract_patch: K must be odd and >= 3");
    const int r = (k - 1) / 2;
    if (!clamped && (center.x - r < 0 || center.y - r < 0 || center.x + r >= image.width ||
                     center.y + r >= image.height))
        throw std::out_of_range("extract_patch: window outside the image");

    patch_view view;
    view.k = k;
    view.channels = image.channels;
    view.values.assign(static_cast<std::size_t>(k) * k * image.channels, 0);
    view.known.assign(static_cast<std::size_t>(k) * k, 0);

    for (int dy = 0; dy < k; ++dy) {
        const int y = center.y - r + dy;
        for (int dx = 0; dx < k; ++dx) {
            const int x = center.x - r + dx;
            if (!image.in_bounds(x, y)) continue;  // only reachable when clamped
            if (!mask.is_known(x, y)) continue;
            const std::size_t local = static_cast<std::size_t>(dy) * k + dx;
            view.known[local] = 1;
            const std::uint8_t* src = image.pixel(x, y);
            std::uint8_t* dst = view.values.data() + local * image.channels;
            for (int c = 0; c < image.channels; ++c) dst[c] = src[c];
        }
    }
    return view;
}

}  // namespace

patch_view extract_patch(const raster_image& image, const mask_image& mask, pixel_coord center,
                         int k) {
    return extract_impl(image, mask, center, k, false);
}

patch_view extract_patch_clamped(const raster_image& image, const mask_image& mask,
                                 pixel_coord center, int k) {
    return extract_impl(image, mask, center, k, true);
}

bool is_fillfront_pixel(const mask_image& mask, int x, int y) {
    if (!mask.is_known(x, y)) return false;
    return (x > 0 && !mask.is_known(x - 1, y)) || (x + 1 < mask.width && !mask.is_known(x + 1, y)) ||
           (y > 0 && !mask.is_known(x, y - 1)) || (y + 1 < mask.height && !mask.is_known(x, y + 1));
}

std::vector<pixel_coord> compute_fillfront(const mask_image& mask) {
    std::vector<pixel_coord> front;
    for (int y = 0; y < mask.height; ++y)
        for (int x = 0; x < mask.width; ++x)
            if (is_fillfront_pixel(mask, x, y)) front.push_back({x, y});
    return front;
}

}  // namespace zinpaint
