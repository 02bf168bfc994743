#include <doctest.h>

#include <random>

#include "zinpaint/image.hpp"

using namespace zinpaint;

namespace {

raster_image ramp_image(int w, int h, int channels = 1) {
    raster_image img(w, h, channels);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < channels; ++c)
                img.pixel(x, y)[c] = static_cast<std::uint8_t>((x + y * w + c) % 251);
    return img;
}

}  // namespace

TEST_CASE("extract_patch on a fully known image") {
    const auto img = ramp_image(20, 20);
    const mask_image mask(20, 20, true);
    const auto view = extract_patch(img, mask, {10, 10}, 9);
    CHECK(view.known_count() == 81);
    for (int dy = 0; dy < 9; ++dy)
        for (int dx = 0; dx < 9; ++dx)
            CHECK(view.values[static_cast<std::size_t>(dy) * 9 + dx] ==
                  *img.pixel(10 - 4 + dx, 10 - 4 + dy));
}

TEST_CASE("extract_patch with a fully unknown mask") {
    const auto img = ramp_image(20, 20);
    const mask_image mask(20, 20, false);
    const auto view = extract_patch(img, mask, {10, 10}, 9);
    CHECK(view.known_count() == 0);
    for (auto v : view.values) CHECK(v == 0);  // unknown pixels read as 0
}

TEST_CASE("extract_patch known flags follow a checkerboard mask") {
    const auto img = ramp_image(3, 3);
    mask_image mask(3, 3, true);
    for (int y = 0; y < 3; ++y)
        for (int x = 0; x < 3; ++x) mask.set_known(x, y, (x + y) % 2 == 0);
    const auto view = extract_patch(img, mask, {1, 1}, 3);
    for (int dy = 0; dy < 3; ++dy)
        for (int dx = 0; dx < 3; ++dx)
            CHECK((view.known[static_cast<std::size_t>(dy) * 3 + dx] != 0) ==
                  mask.is_known(dx, dy));
}

TEST_CASE("extract_patch rejects out-of-bounds windows; the clamped variant marks them unknown") {
    const auto img = ramp_image(20, 20);
    const mask_image mask(20, 20, true);
    CHECK_THROWS_AS((void)extract_patch(img, mask, {1, 10}, 9), std::out_of_range);
    CHECK_THROWS_AS((void)extract_patch(img, mask, {10, 19}, 9), std::out_of_range);

    const auto view = extract_patch_clamped(img, mask, {0, 0}, 9);
    CHECK(view.known_count() == 25);  // only the 5x5 in-image quadrant
    CHECK(view.known[0] == 0);
    CHECK(view.known[4 * 9 + 4] == 1);
}

TEST_CASE("extract_patch is a pure read") {
    const auto img = ramp_image(20, 20, 3);
    mask_image mask(20, 20, true);
    mask.set_known(9, 9, false);
    const auto img_copy = img.data;
    const auto mask_copy = mask.known;
    (void)extract_patch(img, mask, {10, 10}, 9);
    CHECK(img.data == img_copy);
    CHECK(mask.known == mask_copy);
}

TEST_CASE("fillfront of a fully known mask is empty") {
    CHECK(compute_fillfront(mask_image(8, 8, true)).empty());
}

TEST_CASE("fillfront of a single interior unknown pixel is its four neighbors") {
    mask_image mask(8, 8, true);
    mask.set_known(4, 4, false);
    const auto front = compute_fillfront(mask);
    REQUIRE(front.size() == 4);
    CHECK(front[0] == pixel_coord{4, 3});
    CHECK(front[1] == pixel_coord{3, 4});
    CHECK(front[2] == pixel_coord{5, 4});
    CHECK(front[3] == pixel_coord{4, 5});
}

TEST_CASE("fillfront of a 4x4 unknown block is the 16 known pixels ringing it") {
    mask_image mask(10, 10, true);
    for (int y = 3; y <= 6; ++y)
        for (int x = 3; x <= 6; ++x) mask.set_known(x, y, false);
    const auto front = compute_fillfront(mask);

    // oracle: exhaustive neighbor scan
    std::vector<pixel_coord> expect;
    for (int y = 0; y < 10; ++y) {
        for (int x = 0; x < 10; ++x) {
            if (!mask.is_known(x, y)) continue;
            bool adjacent = false;
            const int nx[4] = {x - 1, x + 1, x, x};
            const int ny[4] = {y, y, y - 1, y + 1};
            for (int i = 0; i < 4; ++i)
                if (mask.in_bounds(nx[i], ny[i]) && !mask.is_known(nx[i], ny[i])) adjacent = true;
            if (adjacent) expect.push_back({x, y});
        }
    }
    CHECK(expect.size() == 16);
    CHECK(front == expect);
}

TEST_CASE("fillfront definition holds exhaustively on random masks") {
    std::mt19937 rng(61);
    std::uniform_int_distribution<int> size(2, 64);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        const int w = size(rng), h = size(rng);
        mask_image mask(w, h, true);
        const double p = unit(rng);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) mask.set_known(x, y, unit(rng) >= p);
        const auto front = compute_fillfront(mask);
        std::size_t i = 0;
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                bool adjacent = false;
                if (mask.is_known(x, y)) {
                    if (x > 0 && !mask.is_known(x - 1, y)) adjacent = true;
                    if (x + 1 < w && !mask.is_known(x + 1, y)) adjacent = true;
                    if (y > 0 && !mask.is_known(x, y - 1)) adjacent = true;
                    if (y + 1 < h && !mask.is_known(x, y + 1)) adjacent = true;
                }
                const bool listed =
                    i < front.size() && front[i].x == x && front[i].y == y;
                REQUIRE(listed == adjacent);
                if (listed) ++i;
            }
        }
        REQUIRE(i == front.size());
    }
}
