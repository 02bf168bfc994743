#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "zinpaint/image.hpp"
#include "zinpaint/layouts.hpp"
#include "zinpaint/pca.hpp"
#include "zinpaint/pool.hpp"
#include "zinpaint/types.hpp"
#include "zinpaint/zcurve.hpp"

namespace zinpaint {

// Inpainting cannot proceed without source patches; callers map this to a
// distinct exit code.
class empty_dictionary_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct index_config {
    int patch_size = 9;     // K, odd
    double coverage = 0.6;  // c, fraction of patch pixels per index
    int dims = 10;          // D, principal dimensions
    int knn = 80;           // k, candidate set size
    std::uint32_t mu = 256;    // leaf threshold
    std::uint32_t nu = 2048;   // parallel threshold
    norm_kind norm = norm_kind::l2;

    void validate(int channels) const;
};

// Per-dimension projection range over the dictionary; maps principal
// coordinates to bytes. Out-of-range queries clamp, a collapsed dimension
// (lo == hi) quantizes to 0.
struct quantizer {
    std::vector<double> lo;
    std::vector<double> hi;

    std::uint8_t quantize(int dim, double y) const;
    void quantize_vector(const double* y, std::uint8_t* out) const;
};

// componentsT (x - mean), clamped into the quantizer range and mapped
// affinely onto [0, 255] with half-away-from-zero rounding.
void project_quantize(const pca_model& model, const quantizer& q, const double* x,
                      std::uint8_t* out);

// Top-left corners of every fully known K x K window, row-major, stride 1.
// Throws empty_dictionary_error when no window qualifies.
std::vector<patch_key> collect_dictionary(const raster_image& image, const mask_image& mask,
                                          int patch_size);

// One of the eight indices: the subset layout it covers, the principal space
// fitted over the dictionary restricted to that layout, the byte quantizer,
// and the z-curve-sorted descriptor array.
struct patch_index {
    subset_layout layout;
    pca_model pca;
    quantizer quant;
    zcurve_index index;
    int channels = 1;
    double build_seconds = 0.0;
    double sort_seconds = 0.0;

    // Query descriptor for a (possibly partial) target patch: unknown layout
    // pixels take the projection mean, so they contribute zero in principal
    // space, then project_quantize.
    void make_query(const patch_view& target, std::uint8_t* out) const;

    std::size_t size() const { return index.size(); }
};

patch_index build_index(const raster_image& image, const std::vector<patch_key>& dictionary,
                        const subset_layout& layout, const index_config& cfg);

patch_index build_index(const raster_image& image, const mask_image& mask,
                        const subset_layout& layout, const index_config& cfg);

// The eight per-layout indices over one shared dictionary.
struct multi_index {
    index_config cfg;
    int channels = 1;
    std::vector<patch_key> dictionary;
    std::vector<patch_index> indices;  // size 8, by layout id

    static multi_index build(const raster_image& image, const mask_image& mask,
                             const index_config& cfg, priority_pool* pool = nullptr);
};

}  // namespace zinpaint
