#include "zinpaint/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <set>
#include <thread>

namespace zinpaint {

namespace {

constexpr double kPriorityEpsilon = 1e-3;

std::vector<std::uint16_t> known_locals_of(const patch_view& target) {
    std::vector<std::uint16_t> locals;
    locals.reserve(target.known.size());
    for (std::size_t i = 0; i < target.known.size(); ++i)
        if (target.known[i]) locals.push_back(static_cast<std::uint16_t>(i));
    return locals;
}

double channel_mean(const std::uint8_t* px, int channels) {
    int sum = 0;
    for (int c = 0; c < channels; ++c) sum += px[c];
    return static_cast<double>(sum) / channels;
}

}  // namespace

std::uint32_t masked_cost(const patch_view& target, const patch_view& candidate, norm_kind norm) {
    std::uint32_t acc = 0;
    const int channels = target.channels;
    for (std::size_t i = 0; i < target.known.size(); ++i) {
        if (!target.known[i]) continue;
        const std::uint8_t* t = target.values.data() + i * channels;
        const std::uint8_t* s = candidate.values.data() + i * channels;
        for (int c = 0; c < channels; ++c) {
            const std::int32_t d = static_cast<std::int32_t>(t[c]) - s[c];
            acc += norm == norm_kind::l2 ? static_cast<std::uint32_t>(d * d)
                                         : static_cast<std::uint32_t>(d < 0 ? -d : d);
        }
    }
    return acc;
}

std::uint32_t masked_cost_at(const raster_image& image, const patch_view& target,
                             const std::vector<std::uint16_t>& known_locals, patch_key source,
                             norm_kind norm) {
    const int k = target.k;
    const int channels = image.channels;
    std::uint32_t acc = 0;
    if (norm == norm_kind::l2) {
        for (std::uint16_t local : known_locals) {
            const int ly = local / k, lx = local % k;
            const std::uint8_t* s = image.pixel(source.x + lx, source.y + ly);
            const std::uint8_t* t = target.values.data() + static_cast<std::size_t>(local) * channels;
            for (int c = 0; c < channels; ++c) {
                const std::int32_t d = static_cast<std::int32_t>(t[c]) - s[c];
                acc += static_cast<std::uint32_t>(d * d);
            }
        }
    } else {
        for (std::uint16_t local : known_locals) {
            const int ly = local / k, lx = local % k;
            const std::uint8_t* s = image.pixel(source.x + lx, source.y + ly);
            const std::uint8_t* t = target.values.data() + static_cast<std::size_t>(local) * channels;
            for (int c = 0; c < channels; ++c) {
                const std::int32_t d = static_cast<std::int32_t>(t[c]) - s[c];
                acc += static_cast<std::uint32_t>(d < 0 ? -d : d);
            }
        }
    }
    return acc;
}

double cost_to_error(std::uint32_t cost, norm_kind norm) {
    return norm == norm_kind::l2 ? std::sqrt(static_cast<double>(cost))
                                 : static_cast<double>(cost);
}

double confidence_term(const mask_image& mask, const std::vector<double>& confidence,
                       pixel_coord center, int patch_size) {
    const int r = (patch_size - 1) / 2;
    double sum = 0.0;
    for (int y = center.y - r; y <= center.y + r; ++y) {
        for (int x = center.x - r; x <= center.x + r; ++x) {
            if (!mask.in_bounds(x, y) || !mask.is_known(x, y)) continue;
            sum += confidence[mask.idx(x, y)];
        }
    }
    return sum / (static_cast<double>(patch_size) * patch_size);
}

double compute_priority(const raster_image& image, const mask_image& mask,
                        const std::vector<double>& confidence, pixel_coord center,
                        int patch_size) {
    const int r = (patch_size - 1) / 2;
    const double conf = confidence_term(mask, confidence, center, patch_size);

    // Strongest intensity gradient over known pixels whose central-difference
    // stencil stays on known, in-bounds pixels; unknown values are sentinels
    // and must not leak into the gradient.
    double best_sq = -1.0;
    double best_gx = 0.0, best_gy = 0.0;
    for (int y = center.y - r; y <= center.y + r; ++y) {
        for (int x = center.x - r; x <= center.x + r; ++x) {
            if (x < 1 || y < 1 || x + 1 >= image.width || y + 1 >= image.height) continue;
            if (!mask.is_known(x, y) || !mask.is_known(x - 1, y) || !mask.is_known(x + 1, y) ||
                !mask.is_known(x, y - 1) || !mask.is_known(x, y + 1))
                continue;
            const double gx = (channel_mean(image.pixel(x + 1, y), image.channels) -
                               channel_mean(image.pixel(x - 1, y), image.channels)) /
                              2.0;
            const double gy = (channel_mean(image.pixel(x, y + 1), image.channels) -
                               channel_mean(image.pixel(x, y - 1), image.channels)) /
                              2.0;
            const double sq = gx * gx + gy * gy;
            if (sq > best_sq) {
                best_sq = sq;
                best_gx = gx;
                best_gy = gy;
            }
        }
    }

    // Fill-boundary normal from central differences on the unknown indicator,
    // replicated at the image border.
    auto unknown_at = [&](int x, int y) {
        x = std::clamp(x, 0, mask.width - 1);
        y = std::clamp(y, 0, mask.height - 1);
        return mask.is_known(x, y) ? 0.0 : 1.0;
    };
    const double nx = (unknown_at(center.x + 1, center.y) - unknown_at(center.x - 1, center.y)) / 2.0;
    const double ny = (unknown_at(center.x, center.y + 1) - unknown_at(center.x, center.y - 1)) / 2.0;
    const double nlen = std::hypot(nx, ny);

    double data = kPriorityEpsilon;
    if (best_sq > 0.0 && nlen > 0.0) {
        // Isophote direction is the gradient rotated a quarter turn.
        const double iso_x = -best_gy, iso_y = best_gx;
        data = std::abs(iso_x * nx / nlen + iso_y * ny / nlen) / 255.0 + kPriorityEpsilon;
    }
    return conf * data;
}

pixel_coord select_target(const std::vector<pixel_coord>& fillfront,
                          const std::vector<double>& priorities) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < fillfront.size(); ++i) {
        if (priorities[i] > priorities[best]) {
            best = i;
        } else if (priorities[i] == priorities[best]) {
            const auto a = fillfront[i], b = fillfront[best];
            if (a.y < b.y || (a.y == b.y && a.x < b.x)) best = i;
        }
    }
    return fillfront[best];
}

std::uint32_t select_index(const patch_view& target, const std::array<subset_layout, 8>& layouts) {
    const int k = target.k;
    std::uint32_t best_id = 0;
    std::size_t best_overlap = 0;
    for (const auto& layout : layouts) {
        std::size_t overlap = 0;
        for (const auto& [r, c] : layout.pixels)
            overlap += target.known[static_cast<std::size_t>(r) * k + c] != 0;
        if (overlap > best_overlap) {
            best_overlap = overlap;
            best_id = layout.id;
        }
    }
    return best_id;
}

best_patch query_best_patch(const raster_image& image, const patch_view& target,
                            const multi_index& mi, const index_config& cfg,
                            priority_pool* pool) {
    std::array<subset_layout, 8> layouts;
    for (std::size_t i = 0; i < 8; ++i) layouts[i] = mi.indices[i].layout;
    const std::uint32_t lid = select_index(target, layouts);
    const patch_index& pidx = mi.indices[lid];

    std::vector<std::uint8_t> query(pidx.index.dims());
    pidx.make_query(target, query.data());

    search_params sp;
    sp.k = static_cast<std::uint32_t>(cfg.knn);
    sp.mu = cfg.mu;
    sp.nu = cfg.nu;
    sp.norm = cfg.norm;
    sp.pool = pool;
    const auto candidates = knn_search(pidx.index, query.data(), sp);

    const auto known_locals = known_locals_of(target);
    best_patch best;
    best.layout_id = lid;
    best.candidates = candidates.size();
    bool have = false;
    for (const auto& cand : candidates) {
        const std::uint32_t cost = masked_cost_at(image, target, known_locals, cand.key, cfg.norm);
        if (!have || cost < best.cost ||
            (cost == best.cost && cand.key.packed() < best.key.packed())) {
            best.key = cand.key;
            best.cost = cost;
            have = true;
        }
    }
    best.error = cost_to_error(best.cost, cfg.norm);
    return best;
}

best_patch query_best_patch(const raster_image& image, const patch_view& target,
                            const multi_index& mi, priority_pool* pool) {
    return query_best_patch(image, target, mi, mi.cfg, pool);
}

best_patch brute_force_best(const raster_image& image, const patch_view& target,
                            const std::vector<patch_key>& dictionary, norm_kind norm) {
    const auto known_locals = known_locals_of(target);
    best_patch best;
    best.candidates = dictionary.size();
    bool have = false;
    for (const patch_key key : dictionary) {
        const std::uint32_t cost = masked_cost_at(image, target, known_locals, key, norm);
        if (!have || cost < best.cost || (cost == best.cost && key.packed() < best.key.packed())) {
            best.key = key;
            best.cost = cost;
            have = true;
        }
    }
    best.error = cost_to_error(best.cost, norm);
    return best;
}

paste_result paste(raster_image& image, mask_image& mask, std::vector<double>& confidence,
                   pixel_coord center, patch_key source, int patch_size) {
    const int r = (patch_size - 1) / 2;
    paste_result result;
    result.center_confidence = confidence_term(mask, confidence, center, patch_size);
    for (int dy = 0; dy < patch_size; ++dy) {
        const int y = center.y - r + dy;
        for (int dx = 0; dx < patch_size; ++dx) {
            const int x = center.x - r + dx;
            if (!image.in_bounds(x, y) || mask.is_known(x, y)) continue;
            const std::uint8_t* s = image.pixel(source.x + dx, source.y + dy);
            std::uint8_t* d = image.pixel(x, y);
            for (int c = 0; c < image.channels; ++c) d[c] = s[c];
            mask.set_known(x, y, true);
            confidence[mask.idx(x, y)] = result.center_confidence;
            ++result.filled;
        }
    }
    return result;
}

ae_summary acceleration_error(const std::vector<iteration_record>& records) {
    ae_summary summary;
    double sum = 0.0;
    for (const auto& rec : records) {
        if (!rec.bf_error.has_value()) continue;
        const double bf = *rec.bf_error;
        if (bf > 0.0) {
            sum += rec.z_error / bf - 1.0;
            ++summary.contributing;
        } else if (rec.z_error == 0.0) {
            ++summary.contributing;  // contributes 0
        } else {
            ++summary.excluded;
        }
    }
    if (summary.contributing > 0) summary.mean = sum / static_cast<double>(summary.contributing);
    return summary;
}

namespace {

// Fill-order bookkeeping: the fillfront as an ordered set keyed by
// (priority desc, row-major position asc), with priorities cached per pixel
// and recomputed only where a paste could have changed them.
class fill_driver {
public:
    fill_driver(raster_image& image, mask_image& mask, int patch_size)
        : image_(image), mask_(mask), k_(patch_size),
          confidence_(static_cast<std::size_t>(mask.width) * mask.height, 0.0),
          cached_(static_cast<std::size_t>(mask.width) * mask.height, 0.0),
          in_front_(static_cast<std::size_t>(mask.width) * mask.height, 0) {
        for (int y = 0; y < mask.height; ++y)
            for (int x = 0; x < mask.width; ++x)
                confidence_[mask.idx(x, y)] = mask.is_known(x, y) ? 1.0 : 0.0;
        for (const auto p : compute_fillfront(mask_)) add_front(p);
    }

    bool empty() const { return queue_.empty(); }
    pixel_coord next_target() const {
        const std::uint32_t pos = queue_.begin()->second;
        return {static_cast<int>(pos % mask_.width), static_cast<int>(pos / mask_.width)};
    }

    std::vector<double>& confidence() { return confidence_; }

    // Applies a paste and refreshes fillfront membership and priorities in
    // the affected neighborhood (membership can change within radius+1 of the
    // window, priorities within 2*radius of the center).
    paste_result apply_paste(pixel_coord center, patch_key source) {
        const auto result = paste(image_, mask_, confidence_, center, source, k_);
        const int r = (k_ - 1) / 2;
        const int refresh = k_ - 1;
        for (int y = center.y - refresh; y <= center.y + refresh; ++y) {
            if (y < 0 || y >= mask_.height) continue;
            for (int x = center.x - refresh; x <= center.x + refresh; ++x) {
                if (x < 0 || x >= mask_.width) continue;
                const std::size_t idx = mask_.idx(x, y);
                const bool membership_zone =
                    std::abs(x - center.x) <= r + 1 && std::abs(y - center.y) <= r + 1;
                const bool now = membership_zone ? is_fillfront_pixel(mask_, x, y)
                                                 : in_front_[idx] != 0;
                if (in_front_[idx] && !now) {
                    remove_front({x, y});
                } else if (!in_front_[idx] && now) {
                    add_front({x, y});
                } else if (in_front_[idx] && now) {
                    refresh_front({x, y});
                }
            }
        }
        return result;
    }

private:
    void add_front(pixel_coord p) {
        const std::size_t idx = mask_.idx(p.x, p.y);
        cached_[idx] = compute_priority(image_, mask_, confidence_, p, k_);
        in_front_[idx] = 1;
        queue_.emplace(cached_[idx], static_cast<std::uint32_t>(idx));
    }
    void remove_front(pixel_coord p) {
        const std::size_t idx = mask_.idx(p.x, p.y);
        queue_.erase({cached_[idx], static_cast<std::uint32_t>(idx)});
        in_front_[idx] = 0;
    }
    void refresh_front(pixel_coord p) {
        const std::size_t idx = mask_.idx(p.x, p.y);
        const double fresh = compute_priority(image_, mask_, confidence_, p, k_);
        if (fresh != cached_[idx]) {
            queue_.erase({cached_[idx], static_cast<std::uint32_t>(idx)});
            cached_[idx] = fresh;
            queue_.emplace(fresh, static_cast<std::uint32_t>(idx));
        }
    }

    struct by_priority {
        bool operator()(const std::pair<double, std::uint32_t>& a,
                        const std::pair<double, std::uint32_t>& b) const {
            if (a.first != b.first) return a.first > b.first;
            return a.second < b.second;
        }
    };

    raster_image& image_;
    mask_image& mask_;
    int k_;
    std::vector<double> confidence_;
    std::vector<double> cached_;
    std::vector<std::uint8_t> in_front_;
    std::set<std::pair<double, std::uint32_t>, by_priority> queue_;
};

inpaint_result run_loop(const raster_image& input, const mask_image& input_mask,
                        const multi_index* mi, const std::vector<patch_key>* dictionary,
                        const inpaint_config& cfg, priority_pool* pool, run_stats stats) {
    inpaint_result result;
    result.image = input;
    result.stats = std::move(stats);

    mask_image mask = input_mask;
    std::size_t unknown_left = mask.count_unknown();
    if (unknown_left == 0) return result;

    const auto t0 = std::chrono::steady_clock::now();
    fill_driver driver(result.image, mask, cfg.index.patch_size);

    std::size_t iteration = 0;
    while (unknown_left > 0) {
        if (driver.empty())
            throw std::runtime_error("inpaint: unknown pixels unreachable from the fillfront");
        const auto iter_start = std::chrono::steady_clock::now();

        const pixel_coord target = driver.next_target();
        const patch_view view =
            extract_patch_clamped(result.image, mask, target, cfg.index.patch_size);

        best_patch chosen;
        if (cfg.brute_force) {
            chosen = brute_force_best(result.image, view, *dictionary, cfg.index.norm);
        } else {
            chosen = query_best_patch(result.image, view, *mi, cfg.index, pool);
        }

        iteration_record rec;
        rec.iteration = iteration;
        rec.target = target;
        rec.layout_id = chosen.layout_id;
        rec.source = chosen.key;
        rec.z_error = chosen.error;
        rec.candidates = chosen.candidates;

        if (cfg.oracle && !cfg.brute_force &&
            iteration % std::max<std::size_t>(1, cfg.oracle_stride) == 0) {
            const auto oracle = brute_force_best(result.image, view, *dictionary, cfg.index.norm);
            rec.bf_error = oracle.error;
        } else if (cfg.brute_force) {
            rec.bf_error = chosen.error;
        }

        const auto pasted = driver.apply_paste(target, chosen.key);
        unknown_left -= static_cast<std::size_t>(pasted.filled);
        result.stats.confidence_low = std::min(result.stats.confidence_low,
                                               pasted.center_confidence);
        result.stats.confidence_high = std::max(result.stats.confidence_high,
                                                pasted.center_confidence);

        rec.elapsed_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - iter_start).count();
        result.records.push_back(rec);
        ++iteration;
    }

    result.stats.iterations = iteration;
    result.stats.inpaint_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const auto ae = acceleration_error(result.records);
    result.stats.mean_acceleration_error = ae.mean;
    result.stats.ae_excluded = ae.excluded;
    return result;
}

}  // namespace

inpaint_result inpaint(const raster_image& image, const mask_image& mask,
                       const inpaint_config& cfg) {
    if (image.width != mask.width || image.height != mask.height)
        throw std::invalid_argument("inpaint: image/mask dimensions differ");
    cfg.index.validate(image.channels);

    if (mask.count_unknown() == 0) {
        inpaint_result result;
        result.image = image;
        return result;
    }

    const int workers = cfg.workers > 0
                            ? cfg.workers
                            : std::max(1u, std::thread::hardware_concurrency());
    std::unique_ptr<priority_pool> pool;
    if (workers > 1) pool = std::make_unique<priority_pool>(static_cast<unsigned>(workers - 1));

    run_stats stats;
    if (cfg.brute_force) {
        const auto t0 = std::chrono::steady_clock::now();
        const auto dictionary = collect_dictionary(image, mask, cfg.index.patch_size);
        stats.dictionary_size = dictionary.size();
        stats.build_wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return run_loop(image, mask, nullptr, &dictionary, cfg, pool.get(), std::move(stats));
    }

    const auto t0 = std::chrono::steady_clock::now();
    const multi_index mi = multi_index::build(image, mask, cfg.index, pool.get());
    stats.dictionary_size = mi.dictionary.size();
    stats.build_wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    for (const auto& pidx : mi.indices) {
        stats.index_build_seconds.push_back(pidx.build_seconds);
        stats.sort_seconds += pidx.sort_seconds;
    }
    return run_loop(image, mask, &mi, &mi.dictionary, cfg, pool.get(), std::move(stats));
}

inpaint_result inpaint(const raster_image& image, const mask_image& mask, const multi_index& mi,
                       const inpaint_config& cfg) {
    if (image.width != mask.width || image.height != mask.height)
        throw std::invalid_argument("inpaint: image/mask dimensions differ");
    if (mask.count_unknown() == 0) {
        inpaint_result result;
        result.image = image;
        return result;
    }
    const int workers = cfg.workers > 0
                            ? cfg.workers
                            : std::max(1u, std::thread::hardware_concurrency());
    std::unique_ptr<priority_pool> pool;
    if (workers > 1) pool = std::make_unique<priority_pool>(static_cast<unsigned>(workers - 1));

    run_stats stats;
    stats.dictionary_size = mi.dictionary.size();
    // Query-side knobs (k, mu, nu, norm) come from cfg; build-side parameters
    // are pinned by the prebuilt index.
    inpaint_config effective = cfg;
    effective.index.patch_size = mi.cfg.patch_size;
    effective.index.coverage = mi.cfg.coverage;
    effective.index.dims = mi.cfg.dims;
    return run_loop(image, mask, &mi, &mi.dictionary, effective, pool.get(), std::move(stats));
}

}  // namespace zinpaint
