#pragma once

#include <string>

#include "zinpaint/image.hpp"

namespace zinpaint {

// Reads an 8-bit PNG (when built with libpng) or binary PPM/PGM, chosen by
// file extension. RGBA collapses to RGB, gray+alpha to gray, 16-bit depth to
// 8-bit.
raster_image load_image(const std::string& path);

void save_image(const raster_image& image, const std::string& path);

// Mask convention: single-channel image, value >= 128 is KNOWN, below is
// UNKNOWN (to inpaint). Multi-channel masks are averaged first.
mask_image load_mask(const std::string& path);

bool png_supported();

}  // namespace zinpaint
