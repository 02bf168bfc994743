#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "zinpaint/builder.hpp"
#include "zinpaint/image.hpp"
#include "zinpaint/pool.hpp"

namespace zinpaint {

struct iteration_record {
    std::size_t iteration = 0;
    pixel_coord target;
    std::uint32_t layout_id = 0;
    patch_key source;
    double z_error = 0.0;                // refined best cost, norm units
    std::optional<double> bf_error;      // oracle best cost, norm units
    std::size_t candidates = 0;
    double elapsed_seconds = 0.0;
};

struct inpaint_config {
    index_config index;
    int workers = 0;          // 0: one per logical core
    bool oracle = false;      // run the brute-force oracle alongside the index
    std::size_t oracle_stride = 1;
    bool brute_force = false; // replace the index query with a full dictionary scan
};

struct run_stats {
    std::size_t dictionary_size = 0;
    std::vector<double> index_build_seconds;
    double sort_seconds = 0.0;        // summed over the eight indices
    double build_wall_seconds = 0.0;  // wall clock for the whole build phase
    double inpaint_seconds = 0.0;
    std::size_t iterations = 0;
    std::optional<double> mean_acceleration_error;  // fraction, not percent
    std::size_t ae_excluded = 0;  // oracle hits with zero cost but nonzero refined cost
    double confidence_low = 1.0;   // range of confidence values written by pastes
    double confidence_high = 0.0;
};

struct inpaint_result {
    raster_image image;
    std::vector<iteration_record> records;
    run_stats stats;
};

struct best_patch {
    patch_key key;
    std::uint32_t cost = 0;    // integral cost (L2 squared / L1 sum)
    double error = 0.0;        // cost in norm units (L2 takes the root)
    std::uint32_t layout_id = 0;
    std::size_t candidates = 0;
};

// Cost between two patch views over the pixels known in the target; unknown
// target pixels contribute nothing. L2 is reported squared.
std::uint32_t masked_cost(const patch_view& target, const patch_view& candidate, norm_kind norm);

// Same cost against the patch stored at `source` in the image, without
// materializing a view; `known_locals` lists the target's known pixels.
std::uint32_t masked_cost_at(const raster_image& image, const patch_view& target,
                             const std::vector<std::uint16_t>& known_locals, patch_key source,
                             norm_kind norm);

double cost_to_error(std::uint32_t cost, norm_kind norm);

// Mean confidence over the known pixels of the window, denominator K^2.
double confidence_term(const mask_image& mask, const std::vector<double>& confidence,
                       pixel_coord center, int patch_size);

// Fill priority: confidence term times a data term that favors strong
// isophotes crossing the fill boundary. Zero-gradient or zero-normal cases
// fall back to a small epsilon so flat regions still drain.
double compute_priority(const raster_image& image, const mask_image& mask,
                        const std::vector<double>& confidence, pixel_coord center, int patch_size);

pixel_coord select_target(const std::vector<pixel_coord>& fillfront,
                          const std::vector<double>& priorities);

// Layout with the largest overlap between its pixels and the target's known
// pixels; ties go to the smaller layout id.
std::uint32_t select_index(const patch_view& target, const std::array<subset_layout, 8>& layouts);

// Filter-and-refine: pick the layout, form the query, run the knn filter on
// that index, then evaluate the true masked cost in image space on the
// candidates only. The config overload lets query-side knobs (k, mu, nu,
// norm) differ from the ones the index was built with.
best_patch query_best_patch(const raster_image& image, const patch_view& target,
                            const multi_index& mi, priority_pool* pool = nullptr);
best_patch query_best_patch(const raster_image& image, const patch_view& target,
                            const multi_index& mi, const index_config& cfg, priority_pool* pool);

best_patch brute_force_best(const raster_image& image, const patch_view& target,
                            const std::vector<patch_key>& dictionary, norm_kind norm);

struct paste_result {
    int filled = 0;
    double center_confidence = 0.0;
};

// Copies source pixels into the unknown pixels of the window around center;
// filled pixels become known and inherit the pre-paste confidence term of the
// target. Known pixels are never overwritten.
paste_result paste(raster_image& image, mask_image& mask, std::vector<double>& confidence,
                   pixel_coord center, patch_key source, int patch_size);

inpaint_result inpaint(const raster_image& image, const mask_image& mask,
                       const inpaint_config& cfg);

// Variant with prebuilt indices (reused across runs when only query-side
// parameters change).
inpaint_result inpaint(const raster_image& image, const mask_image& mask, const multi_index& mi,
                       const inpaint_config& cfg);

struct ae_summary {
    std::optional<double> mean;  // fraction: 0.01 means 1%
    std::size_t contributing = 0;
    std::size_t excluded = 0;  // bf_error == 0 with z_error > 0
};

// Mean of z_error/bf_error - 1 over instrumented iterations. Iterations with
// a zero oracle cost contribute 0 when the refined cost is also zero and are
// excluded (and counted) otherwise.
ae_summary acceleration_error(const std::vector<iteration_record>& records);

}  // namespace zinpaint
