#include "zinpaint/builder.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace zinpaint {

namespace {

constexpr long kChunkRows = 4096;

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Gathers the layout pixels of dictionary patches [begin, end) into a row
// matrix, one sample per patch, pixel-major / channel-minor.
void fill_chunk(const raster_image& image, const std::vector<patch_key>& keys, std::size_t begin,
                std::size_t end, const subset_layout& layout, Eigen::MatrixXd& chunk) {
    const int channels = image.channels;
    chunk.resize(static_cast<long>(end - begin),
                 static_cast<long>(layout.pixels.size()) * channels);
    for (std::size_t i = begin; i < end; ++i) {
        const patch_key key = keys[i];
        long col = 0;
        for (const auto& [r, c] : layout.pixels) {
            const std::uint8_t* px = image.pixel(key.x + c, key.y + r);
            for (int ch = 0; ch < channels; ++ch)
                chunk(static_cast<long>(i - begin), col++) = static_cast<double>(px[ch]);
        }
    }
}

}  // namespace

void index_config::validate(int channels) const {
    if (patch_size < 3 || patch_size % 2 == 0)
        throw std::invalid_argument("config: patch size K must be odd and >= 3");
    if (!(coverage > 0.0 && coverage <= 1.0))
        throw std::invalid_argument("config: coverage c must be in (0, 1]");
    const int subset = subset_pixel_count(patch_size, coverage);
    if (subset < 1) throw std::invalid_argument("config: coverage keeps no pixels");
    const int input_dim = subset * channels;
    if (dims < 1 || dims > input_dim)
        throw std::invalid_argument("config: dims D must be in [1, subset pixels * channels]");
    if (dims > static_cast<int>(hyper_cube::max_dims))
        throw std::invalid_argument("config: dims D above the supported maximum of 32");
    if (knn < 1) throw std::invalid_argument("config: k must be >= 1");
    if (mu < 1) throw std::invalid_argument("config: mu must be >= 1");
    if (nu < mu) throw std::invalid_argument("config: nu must be >= mu");
}

std::uint8_t quantizer::quantize(int dim, double y) const {
    const double l = lo[static_cast<std::size_t>(dim)];
    const double h = hi[static_cast<std::size_t>(dim)];
    if (!(h > l)) return 0;
    const double clamped = std::clamp(y, l, h);
    return static_cast<std::uint8_t>(std::llround(255.0 * (clamped - l) / (h - l)));
}

void quantizer::quantize_vector(const double* y, std::uint8_t* out) const {
    for (std::size_t d = 0; d < lo.size(); ++d) out[d] = quantize(static_cast<int>(d), y[d]);
}

void project_quantize(const pca_model& model, const quantizer& q, const double* x,
                      std::uint8_t* out) {
    Eigen::VectorXd y(model.dims());
    model.project(x, y.data());
    q.quantize_vector(y.data(), out);
}

std::vector<patch_key> collect_dictionary(const raster_image& image, const mask_image& mask,
                                          int patch_size) {
    if (image.width != mask.width || image.height != mask.height)
        throw std::invalid_argument("collect_dictionary: image/mask dimensions differ");
    const int k = patch_size;
    std::vector<patch_key> keys;
    if (image.width >= k && image.height >= k) {
        // Summed-area table of unknown flags: a window is usable iff it
        // contains zero unknown pixels.
        const int w = image.width, h = image.height;
        std::vector<std::uint32_t> sat(static_cast<std::size_t>(w + 1) * (h + 1), 0);
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                const std::uint32_t unknown = mask.is_known(x, y) ? 0 : 1;
                sat[static_cast<std::size_t>(y + 1) * (w + 1) + (x + 1)] =
                    unknown + sat[static_cast<std::size_t>(y) * (w + 1) + (x + 1)] +
                    sat[static_cast<std::size_t>(y + 1) * (w + 1) + x] -
                    sat[static_cast<std::size_t>(y) * (w + 1) + x];
            }
        }
        auto window_unknown = [&](int x, int y) {
            return sat[static_cast<std::size_t>(y + k) * (w + 1) + (x + k)] -
                   sat[static_cast<std::size_t>(y) * (w + 1) + (x + k)] -
                   sat[static_cast<std::size_t>(y + k) * (w + 1) + x] +
                   sat[static_cast<std::size_t>(y) * (w + 1) + x];
        };
        for (int y = 0; y + k <= h; ++y)
            for (int x = 0; x + k <= w; ++x)
                if (window_unknown(x, y) == 0)
                    keys.push_back({static_cast<std::uint16_t>(x), static_cast<std::uint16_t>(y)});
    }
    if (keys.empty())
        throw empty_dictionary_error("no fully known patch window; inpainting impossible");
    return keys;
}

void patch_index::make_query(const patch_view& target, std::uint8_t* out) const {
    const int k = target.k;
    Eigen::VectorXd x(pca.input_dim());
    long col = 0;
    for (const auto& [r, c] : layout.pixels) {
        const std::size_t local = static_cast<std::size_t>(r) * k + c;
        if (target.known[local]) {
            const std::uint8_t* px = target.values.data() + local * channels;
            for (int ch = 0; ch < channels; ++ch) x[col++] = static_cast<double>(px[ch]);
        } else {
            for (int ch = 0; ch < channels; ++ch) {
                x[col] = pca.mean[col];
                ++col;
            }
        }
    }
    project_quantize(pca, quant, x.data(), out);
}

patch_index build_index(const raster_image& image, const std::vector<patch_key>& dictionary,
                        const subset_layout& layout, const index_config& cfg) {
    cfg.validate(image.channels);
    if (dictionary.empty()) throw empty_dictionary_error("build_index: empty dictionary");

    const auto t0 = std::chrono::steady_clock::now();
    const std::size_t n = dictionary.size();
    const int input_dim = static_cast<int>(layout.pixels.size()) * image.channels;
    const int dims = std::min<int>(cfg.dims, std::min<int>(input_dim, static_cast<int>(n)));

    patch_index built;
    built.layout = layout;
    built.channels = image.channels;

    pca_accumulator acc(input_dim);
    Eigen::MatrixXd chunk;
    for (std::size_t b = 0; b < n; b += kChunkRows) {
        const std::size_t e = std::min(n, b + kChunkRows);
        fill_chunk(image, dictionary, b, e, layout, chunk);
        acc.add_mean_chunk(chunk);
    }
    acc.finish_mean();
    for (std::size_t b = 0; b < n; b += kChunkRows) {
        const std::size_t e = std::min(n, b + kChunkRows);
        fill_chunk(image, dictionary, b, e, layout, chunk);
        acc.add_covariance_chunk(std::move(chunk));
        chunk = Eigen::MatrixXd();
    }
    built.pca = acc.finalize(dims);

    built.quant.lo.assign(static_cast<std::size_t>(dims),
                          std::numeric_limits<double>::infinity());
    built.quant.hi.assign(static_cast<std::size_t>(dims),
                          -std::numeric_limits<double>::infinity());
    for (std::size_t b = 0; b < n; b += kChunkRows) {
        const std::size_t e = std::min(n, b + kChunkRows);
        fill_chunk(image, dictionary, b, e, layout, chunk);
        chunk.rowwise() -= built.pca.mean.transpose();
        const Eigen::MatrixXd proj = chunk * built.pca.components;
        for (int d = 0; d < dims; ++d) {
            built.quant.lo[static_cast<std::size_t>(d)] =
                std::min(built.quant.lo[static_cast<std::size_t>(d)], proj.col(d).minCoeff());
            built.quant.hi[static_cast<std::size_t>(d)] =
                std::max(built.quant.hi[static_cast<std::size_t>(d)], proj.col(d).maxCoeff());
        }
    }

    std::vector<std::uint8_t> coords(n * static_cast<std::size_t>(dims));
    for (std::size_t b = 0; b < n; b += kChunkRows) {
        const std::size_t e = std::min(n, b + kChunkRows);
        fill_chunk(image, dictionary, b, e, layout, chunk);
        chunk.rowwise() -= built.pca.mean.transpose();
        const Eigen::MatrixXd proj = chunk * built.pca.components;
        for (std::size_t i = b; i < e; ++i) {
            std::uint8_t* row = coords.data() + i * static_cast<std::size_t>(dims);
            for (int d = 0; d < dims; ++d)
                row[d] = built.quant.quantize(d, proj(static_cast<long>(i - b), d));
        }
    }
    built.build_seconds = seconds_since(t0);

    const auto t1 = std::chrono::steady_clock::now();
    built.index = zcurve_index::from_descriptors(std::move(coords), dictionary,
                                                 static_cast<std::uint32_t>(dims), layout.id);
    built.sort_seconds = seconds_since(t1);
    return built;
}

patch_index build_index(const raster_image& image, const mask_image& mask,
                        const subset_layout& layout, const index_config& cfg) {
    return build_index(image, collect_dictionary(image, mask, cfg.patch_size), layout, cfg);
}

multi_index multi_index::build(const raster_image& image, const mask_image& mask,
                               const index_config& cfg, priority_pool* pool) {
    cfg.validate(image.channels);
    multi_index mi;
    mi.cfg = cfg;
    mi.channels = image.channels;
    mi.dictionary = collect_dictionary(image, mask, cfg.patch_size);
    mi.indices.resize(8);

    const auto layouts = build_subset_layouts(cfg.patch_size, cfg.coverage);
    if (pool != nullptr) {
        for (std::uint32_t id = 0; id < 8; ++id) {
            pool->submit(id, [&, id] {
                mi.indices[id] = build_index(image, mi.dictionary, layouts[id], cfg);
            });
        }
        pool->help_until_idle();
    } else {
        for (std::uint32_t id = 0; id < 8; ++id)
            mi.indices[id] = build_index(image, mi.dictionary, layouts[id], cfg);
    }
    return mi;
}

}  // namespace zinpaint
