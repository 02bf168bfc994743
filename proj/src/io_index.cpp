#include "zinpaint/io_index.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>

namespace zinpaint {

namespace {

static_assert(std::endian::native == std::endian::little,
              "index persistence assumes a little-endian host");

constexpr char kMagic[5] = {'Z', 'I', 'D', 'X', '1'};

template <typename T>
void write_pod(std::ostream& out, T value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
    T value{};
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in) throw std::runtime_error("index file: truncated");
    return value;
}

void write_f64s(std::ostream& out, const double* v, std::size_t n) {
    out.write(reinterpret_cast<const char*>(v), static_cast<std::streamsize>(n * sizeof(double)));
}

void read_f64s(std::istream& in, double* v, std::size_t n) {
    in.read(reinterpret_cast<char*>(v), static_cast<std::streamsize>(n * sizeof(double)));
    if (!in) throw std::runtime_error("index file: truncated");
}

}  // namespace

void save_index(const patch_index& index, double coverage, std::ostream& out) {
    out.write(kMagic, sizeof(kMagic));
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(index.layout.patch_size));
    write_pod<double>(out, coverage);
    const std::uint32_t dims = index.index.dims();
    write_pod<std::uint32_t>(out, dims);
    write_pod<std::uint32_t>(out, index.layout.id);
    write_pod<std::uint64_t>(out, index.index.size());
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(index.channels));

    const auto m = static_cast<std::size_t>(index.pca.input_dim());
    write_f64s(out, index.pca.mean.data(), m);
    for (std::uint32_t d = 0; d < dims; ++d) {
        const Eigen::VectorXd col = index.pca.components.col(d);
        write_f64s(out, col.data(), m);
    }
    write_f64s(out, index.pca.eigenvalues.data(), dims);
    write_f64s(out, index.quant.lo.data(), dims);
    write_f64s(out, index.quant.hi.data(), dims);

    for (std::size_t i = 0; i < index.index.size(); ++i) {
        out.write(reinterpret_cast<const char*>(index.index.coords_at(i)), dims);
        const patch_key key = index.index.key_at(i);
        write_pod<std::uint32_t>(out, key.x);
        write_pod<std::uint32_t>(out, key.y);
    }
    if (!out) throw std::runtime_error("index file: write failed");
}

patch_index load_index(std::istream& in, index_config& cfg_out) {
    char magic[5];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw std::runtime_error("index file: bad magic");

    const auto patch_size = read_pod<std::uint32_t>(in);
    const auto coverage = read_pod<double>(in);
    const auto dims = read_pod<std::uint32_t>(in);
    const auto layout_id = read_pod<std::uint32_t>(in);
    const auto count = read_pod<std::uint64_t>(in);
    const auto channels = read_pod<std::uint32_t>(in);
    if (layout_id >= 8 || dims == 0 || dims > hyper_cube::max_dims || (channels != 1 && channels != 3))
        throw std::runtime_error("index file: bad header");

    cfg_out.patch_size = static_cast<int>(patch_size);
    cfg_out.coverage = coverage;
    cfg_out.dims = static_cast<int>(dims);

    const auto layouts = build_subset_layouts(static_cast<int>(patch_size), coverage);
    patch_index loaded;
    loaded.layout = layouts[layout_id];
    loaded.channels = static_cast<int>(channels);

    const auto m = loaded.layout.pixels.size() * channels;
    loaded.pca.mean.resize(static_cast<long>(m));
    read_f64s(in, loaded.pca.mean.data(), m);
    loaded.pca.components.resize(static_cast<long>(m), static_cast<long>(dims));
    for (std::uint32_t d = 0; d < dims; ++d) {
        Eigen::VectorXd col(static_cast<long>(m));
        read_f64s(in, col.data(), m);
        loaded.pca.components.col(d) = col;
    }
    loaded.pca.eigenvalues.resize(dims);
    read_f64s(in, loaded.pca.eigenvalues.data(), dims);
    loaded.quant.lo.resize(dims);
    loaded.quant.hi.resize(dims);
    read_f64s(in, loaded.quant.lo.data(), dims);
    read_f64s(in, loaded.quant.hi.data(), dims);

    std::vector<std::uint8_t> coords(count * dims);
    std::vector<patch_key> keys(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        in.read(reinterpret_cast<char*>(coords.data() + i * dims), dims);
        const auto x = read_pod<std::uint32_t>(in);
        const auto y = read_pod<std::uint32_t>(in);
        if (x > 0xffff || y > 0xffff) throw std::runtime_error("index file: key out of range");
        keys[i] = {static_cast<std::uint16_t>(x), static_cast<std::uint16_t>(y)};
    }
    if (!in) throw std::runtime_error("index file: truncated");
    loaded.index = zcurve_index::from_descriptors(std::move(coords), std::move(keys), dims,
                                                  layout_id);
    return loaded;
}

void save_multi_index(const multi_index& mi, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write index file: " + path);
    for (const auto& index : mi.indices) save_index(index, mi.cfg.coverage, out);
}

multi_index load_multi_index(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open index file: " + path);
    multi_index mi;
    mi.indices.resize(8);
    index_config cfg;
    for (std::size_t i = 0; i < 8; ++i) {
        index_config block_cfg;
        auto loaded = load_index(in, block_cfg);
        if (i == 0) {
            cfg = block_cfg;
            mi.channels = loaded.channels;
        } else if (block_cfg.patch_size != cfg.patch_size || block_cfg.coverage != cfg.coverage ||
                   block_cfg.dims != cfg.dims || loaded.channels != mi.channels) {
            throw std::runtime_error("index file: blocks disagree on build parameters");
        }
        mi.indices[loaded.layout.id] = std::move(loaded);
    }
    mi.cfg = cfg;
    // All blocks share one dictionary; recover it from layout 0's keys.
    mi.dictionary = mi.indices[0].index.keys();
    std::sort(mi.dictionary.begin(), mi.dictionary.end());
    return mi;
}

}  // namespace zinpaint
