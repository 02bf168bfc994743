#pragma once

#include <iosfwd>
#include <string>

#include "zinpaint/builder.hpp"

namespace zinpaint {

// Flat little-endian binary format, one index per block:
//   magic "ZIDX1"
//   u32 K, f64 c, u32 D, u32 layout id, u64 entry count, u32 channels
//   PCA mean (m f64), components (D rows of m f64), eigenvalues (D f64)
//   quantizer lo (D f64), hi (D f64)
//   entries: D bytes + u32 x + u32 y each
// where m = round(c*K^2) * channels. A multi-index file is the eight blocks
// back to back, layout id 0 first.
void save_index(const patch_index& index, double coverage, std::ostream& out);
patch_index load_index(std::istream& in, index_config& cfg_out);

void save_multi_index(const multi_index& mi, const std::string& path);
multi_index load_multi_index(const std::string& path);

}  // namespace zinpaint
