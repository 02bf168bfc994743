#include <doctest.h>

#include <random>

#include "../support/oracles.hpp"
#include "../support/synthetic.hpp"
#include "zinpaint/zcurve.hpp"

using namespace zinpaint;

namespace {

hyper_cube make_cube(std::initializer_list<std::uint8_t> first,
                     std::initializer_list<std::uint8_t> last) {
    hyper_cube c;
    c.dims = static_cast<std::uint32_t>(first.size());
    std::copy(first.begin(), first.end(), c.first.begin());
    std::copy(last.begin(), last.end(), c.last.begin());
    return c;
}

}  // namespace

TEST_CASE("find_split reproduces the published min=(2,0) max=(3,7) example") {
    // Corners are stored x then y; the split lands in y (bit 2 beats bit 0),
    // giving litmax (3,3) and bigmin (2,4).
    const auto cube = make_cube({2, 0}, {3, 7});
    const auto sp = find_split(cube);
    CHECK(sp.dim == 1);
    CHECK(sp.pos == 3);

    hyper_cube left = cube;
    left.last[sp.dim] = sp.pos;
    hyper_cube right = cube;
    right.first[sp.dim] = sp.pos + 1;
    CHECK(left.last[0] == 3);   // litmax = (3, 3)
    CHECK(left.last[1] == 3);
    CHECK(right.first[0] == 2); // bigmin = (2, 4)
    CHECK(right.first[1] == 4);
}

TEST_CASE("find_split with a single varying dimension") {
    const auto cube = make_cube({0, 0}, {255, 0});
    const auto sp = find_split(cube);
    CHECK(sp.dim == 0);
    CHECK(sp.pos == 127);
}

TEST_CASE("find_split ties go to the earlier (more significant) dimension") {
    const auto sp = find_split(make_cube({0, 0}, {7, 7}));
    CHECK(sp.dim == 0);
    CHECK(sp.pos == 3);
}

TEST_CASE("split children partition the parent and match the z-address oracle") {
    std::mt19937 rng(23);
    std::uniform_int_distribution<int> coord(0, 15);  // 4-bit coordinates
    std::uniform_int_distribution<int> dim_count(1, 4);
    for (int trial = 0; trial < 100000; ++trial) {
        const std::uint32_t dims = static_cast<std::uint32_t>(dim_count(rng));
        hyper_cube cube;
        cube.dims = dims;
        bool degenerate = true;
        for (std::uint32_t d = 0; d < dims; ++d) {
            int a = coord(rng), b = coord(rng);
            if (a > b) std::swap(a, b);
            cube.first[d] = static_cast<std::uint8_t>(a);
            cube.last[d] = static_cast<std::uint8_t>(b);
            degenerate &= a == b;
        }
        if (degenerate) continue;

        const auto sp = find_split(cube);
        // per-dimension partition arithmetic
        REQUIRE(sp.pos >= cube.first[sp.dim]);
        REQUIRE(sp.pos < cube.last[sp.dim]);

        // The split must sit at the most significant differing bit over the
        // interleaved address: recompute it from z(min) ^ z(max).
        const std::uint64_t zmin = oracle::z_value(cube.first.data(), dims, 4);
        const std::uint64_t zmax = oracle::z_value(cube.last.data(), dims, 4);
        const int top = oracle::msb_index(static_cast<unsigned>(zmin ^ zmax));
        const std::uint32_t expect_dim = (static_cast<std::uint32_t>(top) % dims);
        const int expect_level = top / static_cast<int>(dims);
        // z bit (level, d) sits at position level*dims + (dims-1-d) from LSB
        const std::uint32_t oracle_dim = dims - 1 - expect_dim;
        REQUIRE(sp.dim == oracle_dim);
        const int bit = expect_level;
        const std::uint8_t below = static_cast<std::uint8_t>((1u << bit) - 1);
        const std::uint8_t keep = static_cast<std::uint8_t>(~((below << 1) | 1u));
        REQUIRE(sp.pos == ((cube.first[sp.dim] & keep) | below));

        // litmax precedes bigmin on the curve
        hyper_cube left = cube, right = cube;
        left.last[sp.dim] = sp.pos;
        right.first[sp.dim] = static_cast<std::uint8_t>(sp.pos + 1);
        REQUIRE(oracle::z_value(left.last.data(), dims, 4) <
                oracle::z_value(right.first.data(), dims, 4));
    }
}

TEST_CASE("split children partition every point, checked exhaustively in 2-D") {
    std::mt19937 rng(29);
    std::uniform_int_distribution<int> coord(0, 15);
    for (int trial = 0; trial < 2000; ++trial) {
        hyper_cube cube;
        cube.dims = 2;
        for (std::uint32_t d = 0; d < 2; ++d) {
            int a = coord(rng), b = coord(rng);
            if (a > b) std::swap(a, b);
            cube.first[d] = static_cast<std::uint8_t>(a);
            cube.last[d] = static_cast<std::uint8_t>(b);
        }
        if (cube.degenerate()) continue;
        const auto sp = find_split(cube);
        hyper_cube left = cube, right = cube;
        left.last[sp.dim] = sp.pos;
        right.first[sp.dim] = static_cast<std::uint8_t>(sp.pos + 1);
        for (int x = cube.first[0]; x <= cube.last[0]; ++x) {
            for (int y = cube.first[1]; y <= cube.last[1]; ++y) {
                const std::uint8_t p[2] = {static_cast<std::uint8_t>(x),
                                           static_cast<std::uint8_t>(y)};
                REQUIRE(left.contains(p) != right.contains(p));  // exactly one child
            }
        }
    }
}

TEST_CASE("region_distance") {
    const std::uint8_t inside[2] = {3, 3};
    CHECK(region_distance(inside, make_cube({0, 0}, {4, 20}), norm_kind::l2) == 0);

    const std::uint8_t q1[1] = {10};
    CHECK(region_distance(q1, make_cube({0}, {4}), norm_kind::l2) == 36);
    CHECK(region_distance(q1, make_cube({0}, {4}), norm_kind::l1) == 6);

    const std::uint8_t q2[2] = {10, 10};
    CHECK(region_distance(q2, make_cube({0, 0}, {4, 20}), norm_kind::l2) == 36);
}

TEST_CASE("knn_list keeps the k smallest packed candidates with eviction") {
    knn_list list(2);
    CHECK(list.bound() == ~0ull);
    CHECK(list.insert(pack_candidate(9, {1, 0})));
    CHECK_FALSE(list.full());
    CHECK(list.insert(pack_candidate(5, {2, 0})));
    CHECK(list.full());
    CHECK(packed_distance(list.bound()) == 9);
    CHECK_FALSE(list.insert(pack_candidate(9, {9, 9})));  // not better than the worst
    CHECK(list.insert(pack_candidate(9, {0, 0})));        // equal distance, smaller key wins
    const auto entries = list.sorted();
    REQUIRE(entries.size() == 2);
    CHECK(entries[0].distance == 5);
    CHECK(entries[1].distance == 9);
    CHECK(entries[1].key == patch_key{0, 0});
}

TEST_CASE("subinterval: full cube returns the parent, empty window is empty") {
    std::mt19937 rng(31);
    auto coords = synthetic::uniform_points(500, 3, rng);
    const auto index = synthetic::make_index(std::move(coords), 3);
    const interval parent{0, static_cast<std::int64_t>(index.size()) - 1};

    const auto full = index.subinterval(hyper_cube::full(3), parent, boundary_hint::none);
    CHECK(full.first == parent.first);
    CHECK(full.last == parent.last);

    // A window outside every point: above the byte maximum is impossible, so
    // pick a corner pair that no point matches exactly.
    hyper_cube point = make_cube({255, 255, 255}, {255, 255, 255});
    bool has_max = false;
    for (std::size_t i = 0; i < index.size(); ++i)
        has_max |= index.coords_at(i)[0] == 255 && index.coords_at(i)[1] == 255 &&
                   index.coords_at(i)[2] == 255;
    if (!has_max) CHECK(index.subinterval(point, parent, boundary_hint::none).empty());
}

TEST_CASE("subinterval matches a scan of z-window membership and respects hints") {
    std::mt19937 rng(37);
    std::uniform_int_distribution<int> coord(0, 15);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<std::uint8_t> coords(400 * 2);
        for (auto& v : coords) v = static_cast<std::uint8_t>(coord(rng));
        const auto index = synthetic::make_index(std::move(coords), 2);
        const interval parent{0, static_cast<std::int64_t>(index.size()) - 1};

        hyper_cube cube;
        cube.dims = 2;
        for (std::uint32_t d = 0; d < 2; ++d) {
            int a = coord(rng), b = coord(rng);
            if (a > b) std::swap(a, b);
            cube.first[d] = static_cast<std::uint8_t>(a);
            cube.last[d] = static_cast<std::uint8_t>(b);
        }

        const auto iv = index.subinterval(cube, parent, boundary_hint::none);
        // oracle: entries within the corner z-window form one contiguous run
        const std::uint64_t zlo = oracle::z_value(cube.first.data(), 2, 8);
        const std::uint64_t zhi = oracle::z_value(cube.last.data(), 2, 8);
        std::int64_t first = -1, last = -2;
        for (std::size_t i = 0; i < index.size(); ++i) {
            const std::uint64_t z = oracle::z_value(index.coords_at(i), 2, 8);
            if (z >= zlo && z <= zhi) {
                if (first < 0) first = static_cast<std::int64_t>(i);
                last = static_cast<std::int64_t>(i);
            }
        }
        if (first < 0) {
            REQUIRE(iv.empty());
        } else {
            REQUIRE(iv.first == first);
            REQUIRE(iv.last == last);
            const auto lower = index.subinterval(cube, {first, parent.last}, boundary_hint::lower);
            CHECK(lower.first == first);
            CHECK(lower.last == last);
            const auto upper = index.subinterval(cube, {parent.first, last}, boundary_hint::upper);
            CHECK(upper.first == first);
            CHECK(upper.last == last);
        }
    }
}

TEST_CASE("splitting culls exactly the entries between litmax and bigmin") {
    // A 14-patch instance on an 8x8 grid in the shape of the published
    // figure: parent window (2,0)-(3,7), split into (2,0)-(3,3) and
    // (2,4)-(3,7). The four entries in the z-gap must drop out.
    std::vector<std::array<std::uint8_t, 2>> points = {
        {2, 0}, {3, 1}, {2, 2}, {3, 3},              // left child region
        {0, 4}, {1, 5}, {0, 6}, {1, 7},              // in the z-gap, outside the x-range
        {2, 4}, {3, 5}, {2, 6}, {3, 7},              // right child region
        {4, 6}, {7, 7},                              // outside the parent window
    };
    std::vector<std::uint8_t> coords;
    for (const auto& p : points) {
        coords.push_back(p[0]);
        coords.push_back(p[1]);
    }
    const auto index = synthetic::make_index(std::move(coords), 2);
    const interval all{0, static_cast<std::int64_t>(index.size()) - 1};

    const auto parent_cube = make_cube({2, 0}, {3, 7});
    const auto parent = index.subinterval(parent_cube, all, boundary_hint::none);

    const auto sp = find_split(parent_cube);
    hyper_cube left = parent_cube, right = parent_cube;
    left.last[sp.dim] = sp.pos;
    right.first[sp.dim] = static_cast<std::uint8_t>(sp.pos + 1);
    const auto left_iv = index.subinterval(left, parent, boundary_hint::lower);
    const auto right_iv = index.subinterval(right, parent, boundary_hint::upper);

    // the gap entries (z strictly between z(litmax) and z(bigmin)) are culled
    const std::uint64_t z_litmax = oracle::z_value(left.last.data(), 2, 8);
    const std::uint64_t z_bigmin = oracle::z_value(right.first.data(), 2, 8);
    std::size_t culled = 0;
    for (std::int64_t i = parent.first; i <= parent.last; ++i) {
        const std::uint64_t z = oracle::z_value(index.coords_at(static_cast<std::size_t>(i)), 2, 8);
        const bool in_left = i >= left_iv.first && i <= left_iv.last;
        const bool in_right = i >= right_iv.first && i <= right_iv.last;
        if (z > z_litmax && z < z_bigmin) {
            REQUIRE_FALSE(in_left);
            REQUIRE_FALSE(in_right);
            ++culled;
        } else {
            REQUIRE(in_left != in_right);
        }
    }
    CHECK(culled == 4);
    CHECK(left_iv.length() + right_iv.length() + 4 == parent.length());
}

TEST_CASE("leaf_scan: empty interval leaves everything untouched") {
    std::mt19937 rng(41);
    const auto index = synthetic::make_index(synthetic::uniform_points(100, 4, rng), 4);
    knn_list list(3);
    auto range = hyper_cube::full(4);
    const auto before = range;
    const std::uint8_t query[4] = {1, 2, 3, 4};
    CHECK_FALSE(leaf_scan(index, {5, 4}, query, norm_kind::l2, list, range));
    CHECK(list.size() == 0);
    CHECK(range.first == before.first);
    CHECK(range.last == before.last);
}

TEST_CASE("leaf_scan: exact hit with k=1 crops the range to the query point") {
    std::vector<std::uint8_t> coords = {7, 9};
    const auto index = synthetic::make_index(std::move(coords), 2);
    knn_list list(1);
    auto range = hyper_cube::full(2);
    const std::uint8_t query[2] = {7, 9};
    CHECK(leaf_scan(index, {0, 0}, query, norm_kind::l2, list, range));
    CHECK(list.size() == 1);
    for (std::uint32_t d = 0; d < 2; ++d) {
        CHECK(range.first[d] == query[d]);
        CHECK(range.last[d] == query[d]);
    }
}

TEST_CASE("leaf_scan crop never excludes a point within the k-th distance") {
    std::mt19937 rng(43);
    std::uniform_int_distribution<int> byte(0, 255);
    for (auto norm : {norm_kind::l2, norm_kind::l1}) {
        for (int trial = 0; trial < 200; ++trial) {
            const std::uint32_t dims = 3;
            const auto index = synthetic::make_index(synthetic::uniform_points(64, dims, rng), dims);
            std::vector<std::uint8_t> query(dims);
            for (auto& v : query) v = static_cast<std::uint8_t>(byte(rng));

            knn_list list(5);
            auto range = hyper_cube::full(dims);
            leaf_scan(index, {0, static_cast<std::int64_t>(index.size()) - 1}, query.data(), norm,
                      list, range);
            REQUIRE(list.full());
            const std::uint32_t kth = packed_distance(list.bound());
            for (std::size_t i = 0; i < index.size(); ++i) {
                if (point_distance(query.data(), index.coords_at(i), dims, norm) <= kth)
                    REQUIRE(range.contains(index.coords_at(i)));
            }
        }
    }
}

TEST_CASE("knn_search trivial cases") {
    // three 1-D entries, query between them
    std::vector<std::uint8_t> coords = {0, 10, 20};
    const auto index = synthetic::make_index(std::move(coords), 1);
    const std::uint8_t q[1] = {9};
    search_params sp;
    sp.k = 1;
    const auto got = knn_search(index, q, sp);
    REQUIRE(got.size() == 1);
    CHECK(got[0].key == patch_key{1, 0});
    CHECK(got[0].distance == 1);

    // k >= size returns everything ordered by (distance, key)
    sp.k = 10;
    const auto all = knn_search(index, q, sp);
    REQUIRE(all.size() == 3);
    CHECK(all == oracle::linear_knn(index, q, 10, norm_kind::l2));

    // empty index
    const zcurve_index empty;
    knn_list list(3);
    knn_search(empty, q, sp, list);
    CHECK(list.size() == 0);
}

TEST_CASE("knn_search equals the linear-scan oracle on random data") {
    std::mt19937 rng(47);
    std::uniform_int_distribution<int> byte(0, 255);
    for (const std::uint32_t dims : {2u, 4u, 8u}) {
        for (const bool clustered : {false, true}) {
            auto coords = clustered ? synthetic::clustered_points(3000, dims, rng)
                                    : synthetic::uniform_points(3000, dims, rng);
            const auto index = synthetic::make_index(std::move(coords), dims);
            std::vector<std::uint8_t> q(dims);
            for (int trial = 0; trial < 120; ++trial) {
                for (auto& v : q) v = static_cast<std::uint8_t>(byte(rng));
                for (const auto norm : {norm_kind::l2, norm_kind::l1}) {
                    for (const std::uint32_t k : {1u, 7u, 64u}) {
                        const auto expect = oracle::linear_knn(index, q.data(), k, norm);
                        for (const std::uint32_t mu : {1u, 16u, 256u}) {
                            search_params sp;
                            sp.k = k;
                            sp.mu = mu;
                            sp.norm = norm;
                            REQUIRE(knn_search(index, q.data(), sp) == expect);
                        }
                    }
                }
            }
        }
    }
}

TEST_CASE("knn_search parallel traversal returns the sequential result") {
    std::mt19937 rng(53);
    std::uniform_int_distribution<int> byte(0, 255);
    priority_pool pool(3);
    const std::uint32_t dims = 6;
    const auto index = synthetic::make_index(synthetic::clustered_points(20000, dims, rng), dims);
    std::vector<std::uint8_t> q(dims);
    for (int trial = 0; trial < 200; ++trial) {
        for (auto& v : q) v = static_cast<std::uint8_t>(byte(rng));
        search_params sequential;
        sequential.k = 20;
        const auto expect = knn_search(index, q.data(), sequential);
        search_params parallel = sequential;
        parallel.pool = &pool;
        parallel.nu = 512;
        REQUIRE(knn_search(index, q.data(), parallel) == expect);
    }
}

TEST_CASE("index is sorted under the comparator and rebuilds bit-identically") {
    std::mt19937 rng(59);
    auto coords = synthetic::clustered_points(5000, 5, rng);
    const auto a = synthetic::make_index(coords, 5);
    const auto b = synthetic::make_index(coords, 5);
    CHECK(a.coords() == b.coords());
    CHECK(a.keys() == b.keys());
    for (std::size_t i = 0; i + 1 < a.size(); ++i)
        REQUIRE_FALSE(morton_less(a.coords_at(i + 1), a.coords_at(i), 5));
}
