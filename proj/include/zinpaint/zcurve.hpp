#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <mutex>
#include <vector>

#include "zinpaint/morton.hpp"
#include "zinpaint/pool.hpp"
#include "zinpaint/types.hpp"

namespace zinpaint {

// Axis-aligned search region in quantized principal space, inclusive bounds.
struct hyper_cube {
    static constexpr std::size_t max_dims = 32;

    std::array<std::uint8_t, max_dims> first{};
    std::array<std::uint8_t, max_dims> last{};
    std::uint32_t dims = 0;

    static hyper_cube full(std::uint32_t dims) {
        hyper_cube c;
        c.dims = dims;
        c.first.fill(0);
        c.last.fill(255);
        return c;
    }

    bool degenerate() const {
        for (std::uint32_t d = 0; d < dims; ++d)
            if (first[d] != last[d]) return false;
        return true;
    }
    bool contains(const std::uint8_t* p) const {
        for (std::uint32_t d = 0; d < dims; ++d)
            if (p[d] < first[d] || p[d] > last[d]) return false;
        return true;
    }
};

// Inclusive index range on the sorted array; empty iff last < first.
struct interval {
    std::int64_t first = 0;
    std::int64_t last = -1;

    bool empty() const { return last < first; }
    std::int64_t length() const { return empty() ? 0 : last - first + 1; }
};

enum class boundary_hint : std::uint8_t { none, lower, upper };

// Where to cut a region: the dimension and position whose most significant
// bit differs between the region corners. The left child keeps last[dim]=pos
// (its max corner is litmax), the right child keeps first[dim]=pos+1 (its min
// corner is bigmin).
struct split_point {
    std::uint32_t dim = 0;
    std::uint8_t pos = 0;
};

split_point find_split(const hyper_cube& range);

// Distance from a query point to the nearest point of the region (0 when the
// query lies inside). L2 is reported squared, like every other distance here.
std::uint32_t region_distance(const std::uint8_t* query, const hyper_cube& range, norm_kind norm);

std::uint32_t point_distance(const std::uint8_t* a, const std::uint8_t* b, std::uint32_t dims,
                             norm_kind norm);

struct knn_entry {
    std::uint32_t distance = 0;
    patch_key key;
    friend bool operator==(const knn_entry&, const knn_entry&) = default;
};

// Bounded best-k set over packed (distance, key) values. A max-heap keeps the
// current worst entry on top; the packed bound is mirrored into an atomic so
// concurrent scans can reject candidates without locking. Insertion order
// never affects the final contents.
class knn_list {
public:
    explicit knn_list(std::uint32_t capacity = 1) { reset(capacity); }

    knn_list(const knn_list&) = delete;
    knn_list& operator=(const knn_list&) = delete;

    void reset(std::uint32_t capacity);

    // Inserts unless the candidate is no better than the current worst entry
    // of a full list; evicts the largest (distance, key) pair on overflow.
    // Returns true iff the list changed.
    bool insert(std::uint64_t candidate);

    // Packed (distance, key) of the k-th entry; UINT64_MAX while not full.
    std::uint64_t bound() const { return bound_.load(std::memory_order_acquire); }

    bool full() const { return size() == capacity_; }
    std::uint32_t capacity() const { return capacity_; }
    std::size_t size() const { return size_.load(std::memory_order_acquire); }

    // Entries in ascending (distance, key) order.
    std::vector<knn_entry> sorted() const;

private:
    std::uint32_t capacity_ = 0;
    std::vector<std::uint64_t> heap_;
    std::atomic<std::uint64_t> bound_{~0ull};
    std::atomic<std::size_t> size_{0};
    mutable std::mutex mx_;
};

// Patch descriptors sorted along the z-curve: a flat n x D byte matrix plus
// the patch key per row. Ties on identical coordinates fall back to row-major
// key order so rebuilds are bit-identical.
class zcurve_index {
public:
    zcurve_index() = default;

    static zcurve_index from_descriptors(std::vector<std::uint8_t> coords,
                                         std::vector<patch_key> keys, std::uint32_t dims,
                                         std::uint32_t layout_id);

    std::size_t size() const { return keys_.size(); }
    bool empty() const { return keys_.empty(); }
    std::uint32_t dims() const { return dims_; }
    std::uint32_t layout_id() const { return layout_id_; }

    const std::uint8_t* coords_at(std::size_t i) const { return coords_.data() + i * dims_; }
    patch_key key_at(std::size_t i) const { return keys_[i]; }
    const std::vector<std::uint8_t>& coords() const { return coords_; }
    const std::vector<patch_key>& keys() const { return keys_; }

    // Maximal sub-interval of `parent` whose entries lie within the z-curve
    // window spanned by the region corners. A boundary hint copies the shared
    // parent bound instead of searching for it.
    interval subinterval(const hyper_cube& range, interval parent, boundary_hint hint) const;

private:
    std::uint32_t dims_ = 0;
    std::uint32_t layout_id_ = 0;
    std::vector<std::uint8_t> coords_;
    std::vector<patch_key> keys_;
};

struct search_params {
    std::uint32_t k = 1;
    std::uint32_t mu = 256;
    norm_kind norm = norm_kind::l2;
    priority_pool* pool = nullptr;  // null: sequential traversal
    std::uint32_t nu = 2048;        // minimum interval length to enqueue a sub-region
};

// Exact k-nearest-neighbor search over the sorted array: recursive region
// splitting, nearer child first, far child pruned against the current k-th
// bound, leaf intervals below mu scanned in full.
void knn_search(const zcurve_index& index, const std::uint8_t* query, const search_params& params,
                knn_list& out);

std::vector<knn_entry> knn_search(const zcurve_index& index, const std::uint8_t* query,
                                  const search_params& params);

// Scans one interval in full, inserting every improving entry. On
// improvement of a full list the active range is cropped to the box
// query +- ceil(k-th distance), which also tightens the callers' ranges.
// Returns true iff the list changed.
bool leaf_scan(const zcurve_index& index, interval iv, const std::uint8_t* query, norm_kind norm,
               knn_list& list, hyper_cube& range);

}  // namespace zinpaint
