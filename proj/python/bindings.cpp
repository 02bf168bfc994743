#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>
#include <stdexcept>

#include "zinpaint/engine.hpp"
#include "zinpaint/morton.hpp"

namespace py = pybind11;
using namespace zinpaint;

namespace {

raster_image image_from_array(const py::array_t<std::uint8_t>& arr) {
    const auto info = arr.request();
    if (info.ndim != 2 && info.ndim != 3)
        throw std::invalid_argument("image must be (H, W) or (H, W, 3) uint8");
    const int h = static_cast<int>(info.shape[0]);
    const int w = static_cast<int>(info.shape[1]);
    const int ch = info.ndim == 3 ? static_cast<int>(info.shape[2]) : 1;
    if (ch != 1 && ch != 3) throw std::invalid_argument("image must have 1 or 3 channels");
    raster_image img(w, h, ch);
    const auto contiguous = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>(arr);
    std::memcpy(img.data.data(), contiguous.data(), img.data.size());
    return img;
}

mask_image mask_from_array(const py::array_t<std::uint8_t>& arr) {
    const auto info = arr.request();
    if (info.ndim != 2) throw std::invalid_argument("mask must be (H, W) uint8");
    const int h = static_cast<int>(info.shape[0]);
    const int w = static_cast<int>(info.shape[1]);
    mask_image mask(w, h);
    const auto contiguous = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>(arr);
    const std::uint8_t* data = contiguous.data();
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            mask.set_known(x, y, data[static_cast<std::size_t>(y) * w + x] >= 128);
    return mask;
}

py::array_t<std::uint8_t> image_to_array(const raster_image& img) {
    if (img.channels == 1) {
        py::array_t<std::uint8_t> out({img.height, img.width});
        std::memcpy(out.mutable_data(), img.data.data(), img.data.size());
        return out;
    }
    py::array_t<std::uint8_t> out({img.height, img.width, img.channels});
    std::memcpy(out.mutable_data(), img.data.data(), img.data.size());
    return out;
}

py::dict run_inpaint(const py::array_t<std::uint8_t>& image, const py::array_t<std::uint8_t>& mask,
                     int patch_size, double coverage, int dims, int knn, std::uint32_t mu,
                     std::uint32_t nu, const std::string& norm, int workers, bool oracle) {
    inpaint_config cfg;
    cfg.index.patch_size = patch_size;
    cfg.index.coverage = coverage;
    cfg.index.dims = dims;
    cfg.index.knn = knn;
    cfg.index.mu = mu;
    cfg.index.nu = nu;
    cfg.index.norm = norm == "l1" ? norm_kind::l1 : norm_kind::l2;
    cfg.workers = workers;
    cfg.oracle = oracle;

    const auto result = inpaint(image_from_array(image), mask_from_array(mask), cfg);

    py::list records;
    for (const auto& r : result.records) {
        py::dict rec;
        rec["iteration"] = r.iteration;
        rec["target"] = py::make_tuple(r.target.x, r.target.y);
        rec["layout"] = r.layout_id;
        rec["source"] = py::make_tuple(r.source.x, r.source.y);
        rec["z_error"] = r.z_error;
        rec["bf_error"] = r.bf_error ? py::object(py::float_(*r.bf_error)) : py::none();
        rec["candidates"] = r.candidates;
        records.append(rec);
    }

    py::dict stats;
    stats["dictionary_size"] = result.stats.dictionary_size;
    stats["iterations"] = result.stats.iterations;
    stats["build_wall_seconds"] = result.stats.build_wall_seconds;
    stats["inpaint_seconds"] = result.stats.inpaint_seconds;
    stats["mean_ae"] = result.stats.mean_acceleration_error
                           ? py::object(py::float_(*result.stats.mean_acceleration_error))
                           : py::none();

    py::dict out;
    out["image"] = image_to_array(result.image);
    out["records"] = records;
    out["stats"] = stats;
    return out;
}

py::tuple run_knn(const py::array_t<std::uint8_t>& points, const py::array_t<std::uint8_t>& query,
                  int k, std::uint32_t mu, const std::string& norm, int workers) {
    const auto pinfo = points.request();
    if (pinfo.ndim != 2) throw std::invalid_argument("points must be (n, D) uint8");
    const auto n = static_cast<std::size_t>(pinfo.shape[0]);
    const auto dims = static_cast<std::uint32_t>(pinfo.shape[1]);
    const auto qinfo = query.request();
    if (qinfo.ndim != 1 || static_cast<std::uint32_t>(qinfo.shape[0]) != dims)
        throw std::invalid_argument("query must be a (D,) uint8 vector");
    if (n > 0xffffffffull) throw std::invalid_argument("too many points");

    const auto pts = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>(points);
    std::vector<std::uint8_t> coords(pts.data(), pts.data() + n * dims);
    std::vector<patch_key> keys(n);
    for (std::size_t i = 0; i < n; ++i)
        keys[i] = {static_cast<std::uint16_t>(i & 0xffff), static_cast<std::uint16_t>(i >> 16)};

    const auto index = zcurve_index::from_descriptors(std::move(coords), std::move(keys), dims, 0);

    search_params sp;
    sp.k = static_cast<std::uint32_t>(k);
    sp.mu = mu;
    sp.norm = norm == "l1" ? norm_kind::l1 : norm_kind::l2;
    std::unique_ptr<priority_pool> pool;
    if (workers > 1) {
        pool = std::make_unique<priority_pool>(static_cast<unsigned>(workers - 1));
        sp.pool = pool.get();
    }

    const auto qarr = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>(query);
    const auto found = knn_search(index, qarr.data(), sp);

    const std::vector<py::ssize_t> shape{static_cast<py::ssize_t>(found.size())};
    py::array_t<std::uint32_t> dist(shape);
    py::array_t<std::uint64_t> idx(shape);
    std::uint32_t* dist_out = dist.mutable_data();
    std::uint64_t* idx_out = idx.mutable_data();
    for (std::size_t i = 0; i < found.size(); ++i) {
        dist_out[i] = found[i].distance;
        idx_out[i] = (static_cast<std::uint64_t>(found[i].key.y) << 16) | found[i].key.x;
    }
    return py::make_tuple(dist, idx);
}

py::list layouts_py(int patch_size, double coverage) {
    py::list out;
    for (const auto& layout : build_subset_layouts(patch_size, coverage)) {
        py::list pixels;
        for (const auto& [r, c] : layout.pixels) pixels.append(py::make_tuple(r, c));
        py::dict d;
        d["id"] = layout.id;
        d["anchor"] = py::make_tuple(layout.anchor.first, layout.anchor.second);
        d["pixels"] = pixels;
        out.append(d);
    }
    return out;
}

bool morton_less_py(const py::array_t<std::uint8_t>& a, const py::array_t<std::uint8_t>& b) {
    const auto ai = a.request(), bi = b.request();
    if (ai.ndim != 1 || bi.ndim != 1 || ai.shape[0] != bi.shape[0])
        throw std::invalid_argument("morton_less expects two equal-length byte vectors");
    const auto ca = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>(a);
    const auto cb = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>(b);
    return morton_less(ca.data(), cb.data(), static_cast<std::size_t>(ai.shape[0]));
}

}  // namespace

PYBIND11_MODULE(_zinpaint, m) {
    m.doc() = "Exemplar-based inpainting accelerated by z-curve patch indices";

    m.def("inpaint", &run_inpaint, py::arg("image"), py::arg("mask"), py::arg("patch_size") = 9,
          py::arg("coverage") = 0.6, py::arg("dims") = 10, py::arg("knn") = 80,
          py::arg("mu") = 256, py::arg("nu") = 2048, py::arg("norm") = "l2",
          py::arg("workers") = 0, py::arg("oracle") = false,
          "Fill the unknown pixels of `image` (mask < 128) from its known parts.");

    m.def("knn_search", &run_knn, py::arg("points"), py::arg("query"), py::arg("k"),
          py::arg("mu") = 256, py::arg("norm") = "l2", py::arg("workers") = 1,
          "Exact knn over byte points via the z-curve index; returns (distances, row indices).");

    m.def("subset_layouts", &layouts_py, py::arg("patch_size"), py::arg("coverage"),
          "The eight pixel-subset layouts for a K x K patch.");

    m.def("morton_less", &morton_less_py, py::arg("a"), py::arg("b"),
          "Order two byte vectors by z-curve position.");

    m.def("less_most_significant_bit",
          [](int a, int b) {
              return less_most_significant_bit(static_cast<std::uint8_t>(a),
                                               static_cast<std::uint8_t>(b));
          },
          py::arg("a"), py::arg("b"));
}
