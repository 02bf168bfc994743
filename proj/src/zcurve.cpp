#include "zinpaint/zcurve.hpp"

#include <algorithm>
#include <bit>
#include <cassert>
#include <cmath>
#include <memory>
#include <numeric>
#include <stdexcept>

namespace zinpaint {

namespace {

// ceil(sqrt(n)) in exact integer arithmetic; n stays far below 2^32.
std::uint32_t ceil_isqrt(std::uint32_t n) {
    auto s = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(n)));
    while (s > 0 && s * s >= n) --s;
    while (s * s < n) ++s;
    return static_cast<std::uint32_t>(s);
}

}  // namespace

void knn_list::reset(std::uint32_t capacity) {
    capacity_ = std::max<std::uint32_t>(capacity, 1);
    heap_.clear();
    heap_.reserve(capacity_);
    bound_.store(~0ull, std::memory_order_release);
    size_.store(0, std::memory_order_release);
}

bool knn_list::insert(std::uint64_t candidate) {
    if (candidate >= bound_.load(std::memory_order_acquire)) return false;
    std::lock_guard<std::mutex> lk(mx_);
    if (heap_.size() < capacity_) {
        heap_.push_back(candidate);
        std::push_heap(heap_.begin(), heap_.end());
        size_.store(heap_.size(), std::memory_order_release);
        if (heap_.size() == capacity_) bound_.store(heap_.front(), std::memory_order_release);
        return true;
    }
    if (candidate >= heap_.front()) return false;  // bound was stale
    std::pop_heap(heap_.begin(), heap_.end());
    heap_.back() = candidate;
    std::push_heap(heap_.begin(), heap_.end());
    bound_.store(heap_.front(), std::memory_order_release);
    return true;
}

std::vector<knn_entry> knn_list::sorted() const {
    std::vector<std::uint64_t> packed;
    {
        std::lock_guard<std::mutex> lk(mx_);
        packed = heap_;
    }
    std::sort(packed.begin(), packed.end());
    std::vector<knn_entry> out;
    out.reserve(packed.size());
    for (std::uint64_t c : packed) out.push_back({packed_distance(c), packed_key(c)});
    return out;
}

split_point find_split(const hyper_cube& range) {
    assert(!range.degenerate());
    int best_bit = -1;
    std::uint32_t best_dim = 0;
    for (std::uint32_t d = 0; d < range.dims; ++d) {
        const std::uint8_t diff = static_cast<std::uint8_t>(range.first[d] ^ range.last[d]);
        const int bit = diff == 0 ? -1 : std::bit_width(static_cast<unsigned>(diff)) - 1;
        if (bit > best_bit) {  // equal levels keep the earlier, more significant dimension
            best_bit = bit;
            best_dim = d;
        }
    }
    const std::uint8_t below = static_cast<std::uint8_t>((1u << best_bit) - 1);
    const std::uint8_t keep = static_cast<std::uint8_t>(~((below << 1) | 1u));
    return {best_dim, static_cast<std::uint8_t>((range.first[best_dim] & keep) | below)};
}

std::uint32_t region_distance(const std::uint8_t* query, const hyper_cube& range, norm_kind norm) {
    std::uint32_t acc = 0;
    for (std::uint32_t d = 0; d < range.dims; ++d) {
        std::uint32_t gap = 0;
        if (query[d] < range.first[d]) gap = range.first[d] - query[d];
        else if (query[d] > range.last[d]) gap = query[d] - range.last[d];
        acc += norm == norm_kind::l2 ? gap * gap : gap;
    }
    return acc;
}

std::uint32_t point_distance(const std::uint8_t* a, const std::uint8_t* b, std::uint32_t dims,
                             norm_kind norm) {
    std::uint32_t acc = 0;
    if (norm == norm_kind::l2) {
        for (std::uint32_t d = 0; d < dims; ++d) {
            const std::int32_t diff = static_cast<std::int32_t>(a[d]) - b[d];
            acc += static_cast<std::uint32_t>(diff * diff);
        }
    } else {
        for (std::uint32_t d = 0; d < dims; ++d) {
            acc += static_cast<std::uint32_t>(a[d] > b[d] ? a[d] - b[d] : b[d] - a[d]);
        }
    }
    return acc;
}

zcurve_index zcurve_index::from_descriptors(std::vector<std::uint8_t> coords,
                                            std::vector<patch_key> keys, std::uint32_t dims,
                                            std::uint32_t layout_id) {
    if (dims == 0 || dims > hyper_cube::max_dims)
        throw std::invalid_argument("zcurve_index: dims must be in [1, 32]");
    if (coords.size() != keys.size() * dims)
        throw std::invalid_argument("zcurve_index: coords/keys size mismatch");

    std::vector<std::uint32_t> order(keys.size());
    std::iota(order.begin(), order.end(), 0u);
    const std::uint8_t* base = coords.data();
    std::sort(order.begin(), order.end(), [&](std::uint32_t ia, std::uint32_t ib) {
        const std::uint8_t* a = base + static_cast<std::size_t>(ia) * dims;
        const std::uint8_t* b = base + static_cast<std::size_t>(ib) * dims;
        if (morton_less(a, b, dims)) return true;
        if (morton_less(b, a, dims)) return false;
        return keys[ia].packed() < keys[ib].packed();
    });

    zcurve_index idx;
    idx.dims_ = dims;
    idx.layout_id_ = layout_id;
    idx.coords_.resize(coords.size());
    idx.keys_.resize(keys.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        const std::uint8_t* src = base + static_cast<std::size_t>(order[i]) * dims;
        std::copy(src, src + dims, idx.coords_.data() + i * dims);
        idx.keys_[i] = keys[order[i]];
    }
    return idx;
}

interval zcurve_index::subinterval(const hyper_cube& range, interval parent,
                                   boundary_hint hint) const {
    if (parent.empty()) return parent;
    std::int64_t lo = parent.first;
    std::int64_t hi = parent.last;
    if (hint != boundary_hint::lower) {
        // first entry e with !(e < min corner); probing the parent bound
        // first short-circuits the frequent covers-everything case
        std::int64_t a = parent.first, b = parent.last + 1;
        if (!morton_less(coords_at(static_cast<std::size_t>(a)), range.first.data(), dims_)) {
            b = a;
        }
        while (a < b) {
            const std::int64_t mid = a + (b - a) / 2;
            if (morton_less(coords_at(static_cast<std::size_t>(mid)), range.first.data(), dims_))
                a = mid + 1;
            else
                b = mid;
        }
        lo = a;
    }
    if (hint != boundary_hint::upper) {
        // one past the last entry e with !(max corner < e)
        std::int64_t a = lo, b = parent.last + 1;
        if (a <= parent.last &&
            !morton_less(range.last.data(), coords_at(static_cast<std::size_t>(parent.last)),
                         dims_)) {
            a = b;
        }
        while (a < b) {
            const std::int64_t mid = a + (b - a) / 2;
            if (morton_less(range.last.data(), coords_at(static_cast<std::size_t>(mid)), dims_))
                b = mid;
            else
                a = mid + 1;
        }
        hi = a - 1;
    }
    return {lo, hi};
}

namespace {

struct search_ctx {
    const zcurve_index& index;
    const std::uint8_t* query;
    norm_kind norm;
    std::int64_t mu;
    knn_list& list;
    priority_pool* pool;
    std::int64_t nu;
};

// Collapsed one-child splits narrow the range in place; the trail records
// what to restore. Along any root-to-leaf path each entry fixes one more bit
// of the range, so 8 * max_dims bounds the depth. One trail exists per
// executing traversal: the caller's on the inline path, a fresh one per
// spawned job.
struct trail_state {
    struct saved_byte {
        std::uint32_t dim;
        std::uint8_t value;
        bool is_last;
    };
    saved_byte entries[hyper_cube::max_dims * 8];
    std::size_t depth = 0;
};

// Intersects the range with the box query +- radius per dimension. An empty
// intersection in some dimension collapses that dimension to the range bound
// nearest the box; everything cut off lies beyond the current k-th distance.
void crop_range(hyper_cube& range, const std::uint8_t* query, std::uint32_t radius) {
    for (std::uint32_t d = 0; d < range.dims; ++d) {
        const std::uint32_t q = query[d];
        const std::uint8_t lo = static_cast<std::uint8_t>(q > radius ? q - radius : 0);
        const std::uint8_t hi = static_cast<std::uint8_t>(std::min<std::uint32_t>(255, q + radius));
        std::uint8_t nf = std::max(range.first[d], lo);
        std::uint8_t nl = std::min(range.last[d], hi);
        if (nf > nl) {
            if (hi < range.first[d]) nf = nl = range.first[d];
            else nf = nl = range.last[d];
        }
        range.first[d] = nf;
        range.last[d] = nl;
    }
}

// Fixed-dimension distance kernels keep the hot loop vectorizable; the
// switch costs one branch per scanned block.
template <std::uint32_t Dims, norm_kind Norm>
bool scan_block(search_ctx& ctx, std::int64_t first, std::int64_t last) {
    const std::uint8_t* coords = ctx.index.coords_at(static_cast<std::size_t>(first));
    const std::uint8_t* q = ctx.query;
    bool improved = false;
    for (std::int64_t i = first; i <= last; ++i, coords += Dims) {
        std::uint32_t dist = 0;
        for (std::uint32_t d = 0; d < Dims; ++d) {
            if constexpr (Norm == norm_kind::l2) {
                const std::int32_t diff = static_cast<std::int32_t>(q[d]) - coords[d];
                dist += static_cast<std::uint32_t>(diff * diff);
            } else {
                dist += static_cast<std::uint32_t>(q[d] > coords[d] ? q[d] - coords[d]
                                                                    : coords[d] - q[d]);
            }
        }
        const std::uint64_t cand =
            pack_candidate(dist, ctx.index.key_at(static_cast<std::size_t>(i)));
        if (cand < ctx.list.bound()) improved |= ctx.list.insert(cand);
    }
    return improved;
}

template <norm_kind Norm>
bool scan_dispatch(search_ctx& ctx, std::int64_t first, std::int64_t last) {
    switch (ctx.index.dims()) {
        case 4: return scan_block<4, Norm>(ctx, first, last);
        case 6: return scan_block<6, Norm>(ctx, first, last);
        case 8: return scan_block<8, Norm>(ctx, first, last);
        case 10: return scan_block<10, Norm>(ctx, first, last);
        case 12: return scan_block<12, Norm>(ctx, first, last);
        case 14: return scan_block<14, Norm>(ctx, first, last);
        case 16: return scan_block<16, Norm>(ctx, first, last);
        default: break;
    }
    const std::uint32_t dims = ctx.index.dims();
    bool improved = false;
    for (std::int64_t i = first; i <= last; ++i) {
        const std::uint32_t dist =
            point_distance(ctx.query, ctx.index.coords_at(static_cast<std::size_t>(i)), dims, Norm);
        improved |=
            ctx.list.insert(pack_candidate(dist, ctx.index.key_at(static_cast<std::size_t>(i))));
    }
    return improved;
}

bool scan_interval(search_ctx& ctx, interval iv, hyper_cube& range) {
    if (iv.empty()) return false;
    const bool improved = ctx.norm == norm_kind::l2
                              ? scan_dispatch<norm_kind::l2>(ctx, iv.first, iv.last)
                              : scan_dispatch<norm_kind::l1>(ctx, iv.first, iv.last);
    if (improved && ctx.list.full()) {
        const std::uint32_t kth = packed_distance(ctx.list.bound());
        const std::uint32_t radius = ctx.norm == norm_kind::l2 ? ceil_isqrt(kth) : kth;
        crop_range(range, ctx.query, radius);
    }
    return improved;
}

// A sub-region cannot contain an improving entry once even a zero-key
// candidate at its region distance would not beat the k-th bound.
bool prunable(const search_ctx& ctx, std::uint32_t dist) {
    return (static_cast<std::uint64_t>(dist) << 32) >= ctx.list.bound();
}

std::uint32_t axis_gap(std::uint8_t q, std::uint8_t lo, std::uint8_t hi) {
    if (q < lo) return static_cast<std::uint32_t>(lo - q);
    if (q > hi) return static_cast<std::uint32_t>(q - hi);
    return 0;
}

std::uint32_t gap_weight(std::uint32_t gap, norm_kind norm) {
    return norm == norm_kind::l2 ? gap * gap : gap;
}

bool search_node(search_ctx& ctx, trail_state& trail, hyper_cube& range, interval iv,
                 std::uint32_t node_dist);

// Hands a sub-region to the pool when it is big enough, otherwise traverses
// it inline. Spawned jobs get their own copy of the range: crops inside the
// job stay local, pruning still tightens globally through the shared list.
bool visit_far_child(search_ctx& ctx, trail_state& trail, hyper_cube& range, interval iv,
                     std::uint32_t dist) {
    if (ctx.pool != nullptr && iv.length() >= ctx.nu) {
        auto state = std::make_shared<hyper_cube>(range);
        search_ctx* parent = &ctx;  // the root context outlives every job
        ctx.pool->submit(dist, [parent, state, iv] {
            // the bound may have tightened since this region was scheduled
            const std::uint32_t now = region_distance(parent->query, *state, parent->norm);
            if (prunable(*parent, now)) return;
            trail_state job_trail;
            search_node(*parent, job_trail, *state, iv, now);
        });
        return false;  // improvements surface through the shared list
    }
    return search_node(ctx, trail, range, iv, dist);
}

// node_dist carries the region distance so the children's distances take one
// axis update instead of a full recomputation: crops never move the near
// bound of a dimension, so the cached value stays exact at node entry.
//
// Splits whose z-gap holds no entry at all are collapsed in place: two corner
// probes against the interval's first and last entries detect that every
// entry lies in one child, the range byte is narrowed, and the loop goes
// around without touching the array. Mutated (dim, byte) pairs are restored
// on exit, so callers see the usual single-byte discipline.
bool search_node(search_ctx& ctx, trail_state& trail, hyper_cube& range, interval iv,
                 std::uint32_t node_dist) {
    const std::size_t watermark = trail.depth;
    bool improved = false;

    auto unwind = [&] {
        while (trail.depth > watermark) {
            const auto& s = trail.entries[--trail.depth];
            (s.is_last ? range.last[s.dim] : range.first[s.dim]) = s.value;
        }
    };

    for (;;) {
        if (iv.empty()) break;
        if (iv.length() <= ctx.mu || range.degenerate()) {
            improved |= scan_interval(ctx, iv, range);
            break;
        }

        const split_point sp = find_split(range);
        const std::uint8_t q = ctx.query[sp.dim];
        const std::uint32_t base =
            node_dist - gap_weight(axis_gap(q, range.first[sp.dim], range.last[sp.dim]), ctx.norm);
        const std::uint32_t left_dist =
            base + gap_weight(axis_gap(q, range.first[sp.dim], sp.pos), ctx.norm);
        const std::uint32_t right_dist =
            base +
            gap_weight(axis_gap(q, static_cast<std::uint8_t>(sp.pos + 1), range.last[sp.dim]),
                       ctx.norm);

        // one-child-only splits: decide with two corner probes
        const std::uint8_t saved_last_byte = range.last[sp.dim];
        range.last[sp.dim] = sp.pos;  // corners now describe the left child
        const bool all_left = !morton_less(
            range.last.data(), ctx.index.coords_at(static_cast<std::size_t>(iv.last)),
            ctx.index.dims());
        if (all_left) {
            trail.entries[trail.depth++] = {sp.dim, saved_last_byte, true};
            node_dist = left_dist;
            continue;
        }
        range.last[sp.dim] = saved_last_byte;

        const std::uint8_t saved_first_byte = range.first[sp.dim];
        range.first[sp.dim] = static_cast<std::uint8_t>(sp.pos + 1);
        const bool all_right = !morton_less(
            ctx.index.coords_at(static_cast<std::size_t>(iv.first)), range.first.data(),
            ctx.index.dims());
        if (all_right) {
            trail.entries[trail.depth++] = {sp.dim, saved_first_byte, false};
            node_dist = right_dist;
            continue;
        }
        range.first[sp.dim] = saved_first_byte;

        if (right_dist >= left_dist) {
            range.last[sp.dim] = sp.pos;
            const interval left = ctx.index.subinterval(range, iv, boundary_hint::lower);
            improved |= search_node(ctx, trail, range, left, left_dist);
            range.last[sp.dim] = saved_last_byte;
            if (prunable(ctx, right_dist)) break;
            range.first[sp.dim] = static_cast<std::uint8_t>(sp.pos + 1);
            const interval right = ctx.index.subinterval(
                range, iv, improved ? boundary_hint::none : boundary_hint::upper);
            improved |= visit_far_child(ctx, trail, range, right, right_dist);
            range.first[sp.dim] = saved_first_byte;
        } else {
            range.first[sp.dim] = static_cast<std::uint8_t>(sp.pos + 1);
            const interval right = ctx.index.subinterval(range, iv, boundary_hint::upper);
            improved |= search_node(ctx, trail, range, right, right_dist);
            range.first[sp.dim] = saved_first_byte;
            if (prunable(ctx, left_dist)) break;
            range.last[sp.dim] = sp.pos;
            const interval left = ctx.index.subinterval(
                range, iv, improved ? boundary_hint::none : boundary_hint::lower);
            improved |= visit_far_child(ctx, trail, range, left, left_dist);
            range.last[sp.dim] = saved_last_byte;
        }
        break;
    }

    unwind();
    return improved;
}

}  // namespace

bool leaf_scan(const zcurve_index& index, interval iv, const std::uint8_t* query, norm_kind norm,
               knn_list& list, hyper_cube& range) {
    search_ctx ctx{index, query, norm, 0, list, nullptr, 0};
    return scan_interval(ctx, iv, range);
}

void knn_search(const zcurve_index& index, const std::uint8_t* query, const search_params& params,
                knn_list& out) {
    out.reset(params.k);
    if (index.empty()) return;
    hyper_cube range = hyper_cube::full(index.dims());
    const interval root{0, static_cast<std::int64_t>(index.size()) - 1};
    search_ctx ctx{index,
                   query,
                   params.norm,
                   std::max<std::int64_t>(1, params.mu),
                   out,
                   params.pool,
                   std::max<std::int64_t>(1, params.nu)};
    trail_state trail;
    search_node(ctx, trail, range, root, region_distance(query, range, params.norm));
    if (params.pool != nullptr) params.pool->help_until_idle();
}

std::vector<knn_entry> knn_search(const zcurve_index& index, const std::uint8_t* query,
                                  const search_params& params) {
    knn_list list(params.k);
    knn_search(index, query, params, list);
    return list.sorted();
}

}  // namespace zinpaint
